#include "hsm/errors.hpp"
#include "hsm/oscillatory.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hsm;

namespace {

// The composed defining function before the shear of the x variables:
// bar x + t Lambda (ubar x - ubar y) + ubar x^T J ubar y with
// ubar y = (y', x_{2n} - t g((x' - y') / t)).
Vec composed_sbar(const MetivierStructure& s, const Vec& x, double t, const Vec& y) {
  const int n2 = 2 * s.n(), k = n2 - 1;
  const Vec w = (x.head(k) - y.head(k)) / t;
  Vec uy(n2);
  uy.head(k) = y.head(k);
  uy(k) = x(k) - t * std::sqrt(1.0 - w.squaredNorm());
  const Vec ux = x.head(n2);
  Vec out(s.m());
  for (int i = 0; i < s.m(); ++i) {
    out(i) = x(n2 + i) + t * s.Lambda().row(i).dot(ux - uy) + ux.dot(s.J(i) * uy);
  }
  return out;
}

// The shear carrying bar x to the variables in which the defining
// functions are written.
Vec sheared(const MetivierStructure& s, const Vec& x, double t) {
  const int n2 = 2 * s.n(), k = n2 - 1;
  const Vec ux = x.head(n2);
  Vec out = x;
  for (int i = 0; i < s.m(); ++i) {
    const double ci = (s.J(i).transpose() * ux)(k) - t * s.Lambda()(i, k);
    out(n2 + i) = x(n2 + i) - t * s.Lambda().row(i).dot(ux) - x(k) * ci;
  }
  return out;
}

Mat tilt(int m, int n2, double scale) {
  Mat L(m, n2);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < n2; ++k) L(i, k) = scale * std::sin(1.0 + 3.0 * i + k);
  }
  return L;
}

}  // namespace

TEST(PhaseModel, ChartFunctions) {
  const Vec z = Vec::Zero(3);
  EXPECT_EQ(PhaseModel::g(z), 1.0);
  EXPECT_EQ(PhaseModel::grad_g(z), Vec(Vec::Zero(3)));
  EXPECT_EQ(PhaseModel::hess_g(z), Mat(-Mat::Identity(3, 3)));
  EXPECT_EQ(PhaseModel::h(z), -1.0);
  EXPECT_EQ(PhaseModel::grad_h(z), Vec(Vec::Zero(3)));
  const Vec w = (Vec(3) << 0.2, -0.1, 0.3).finished();
  const double step = 1e-5;
  for (int j = 0; j < 3; ++j) {
    const Vec e = Vec::Unit(3, j);
    EXPECT_NEAR((PhaseModel::g(w + step * e) - PhaseModel::g(w - step * e)) / (2 * step), PhaseModel::grad_g(w)(j),
                1e-9);
    const Vec dg = (PhaseModel::grad_g(w + step * e) - PhaseModel::grad_g(w - step * e)) / (2 * step);
    EXPECT_LE((dg - PhaseModel::hess_g(w).col(j)).norm(), 1e-6);
    EXPECT_NEAR((PhaseModel::h(w + step * e) - PhaseModel::h(w - step * e)) / (2 * step), PhaseModel::grad_h(w)(j),
                1e-9);
  }
  EXPECT_NEAR(PhaseModel::h(w), w.dot(PhaseModel::grad_g(w)) - PhaseModel::g(w), 1e-15);
  EXPECT_THROW(PhaseModel::g((Vec(3) << 1.0, 0.0, 0.0).finished()), DomainError);
}

TEST(DefiningFunctions, DiagonalValue) {
  const PhaseModel pm(standard_heisenberg(2));
  Vec x = Vec::Zero(5);
  x(3) = 0.7;
  x(4) = -0.3;
  const Vec y = x;
  EXPECT_DOUBLE_EQ(defining_functions(pm, x, 1.0, y).s2n, 0.7 - 1.0);
  Vec far = y;
  far(0) = 2.0;
  EXPECT_THROW(defining_functions(pm, x, 1.0, far), DomainError);
}

TEST(DefiningFunctions, MatchesComposition) {
  for (bool with_lambda : {false, true}) {
    MetivierStructure s = standard_heisenberg(2);
    if (with_lambda) s = s.with_lambda(tilt(1, 4, 0.2));
    const PhaseModel pm(s);
    ChartSampler sampler(pm, 5);
    for (int k = 0; k < 50; ++k) {
      const ChartPoint p = sampler.generic();
      const Vec direct = composed_sbar(s, sheared(s, p.x, p.t), p.t, p.y);
      EXPECT_LE((defining_functions(pm, p.x, p.t, p.y).sbar - direct).norm(), 1e-12);
    }
  }
}

TEST(DefiningFunctions, AffineInX2n) {
  const PhaseModel pm(quaternionic_htype(1, 2));
  ChartSampler sampler(pm, 6);
  const ChartPoint p = sampler.generic();
  Vec xp = p.x, xm = p.x;
  xp(3) += 0.01;
  xm(3) -= 0.01;
  EXPECT_NEAR((defining_functions(pm, xp, p.t, p.y).s2n - defining_functions(pm, xm, p.t, p.y).s2n) / 0.02, 1.0,
              1e-12);
}

TEST(Xi, MatchesFiniteDifferencesOfPhi) {
  for (const MetivierStructure& s :
       {standard_heisenberg(2), standard_heisenberg(1).with_lambda(tilt(1, 2, 0.1)), quaternionic_htype(1, 3)}) {
    const PhaseModel pm(s);
    ChartSampler sampler(pm, 7);
    const int d = s.d();
    for (int k = 0; k < 100; ++k) {
      const ChartPoint p = sampler.generic();
      const Vec analytic = xi(pm, p.x, p.t, p.y);
      Vec fd(d + 1);
      const double h = 1e-5;
      for (int j = 0; j < d; ++j) {
        const Vec e = Vec::Unit(d, j);
        fd(j) = (phi(pm, p.x + h * e, p.t, p.y) - phi(pm, p.x - h * e, p.t, p.y)) / (2 * h);
      }
      fd(d) = (phi(pm, p.x, p.t + h, p.y) - phi(pm, p.x, p.t - h, p.y)) / (2 * h);
      EXPECT_LE((fd - analytic).cwiseAbs().maxCoeff() / std::max(1.0, analytic.cwiseAbs().maxCoeff()), 1e-6);
    }
  }
}

TEST(Xi, MixedDerivativesMatchFiniteDifferences) {
  const PhaseModel pm(standard_heisenberg(2).with_lambda(tilt(1, 4, 0.1)));
  ChartSampler sampler(pm, 8);
  for (int k = 0; k < 20; ++k) {
    const ChartPoint p = sampler.generic();
    const Mat analytic = xi_y(pm, p.x, p.t, p.y);
    for (int j = 0; j < pm.d(); ++j) {
      const Vec e = Vec::Unit(pm.d(), j);
      const double h = 1e-5;
      const Vec fd = (xi(pm, p.x, p.t, p.y + h * e) - xi(pm, p.x, p.t, p.y - h * e)) / (2 * h);
      EXPECT_LE((fd - analytic.col(j)).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(Xi, DiagonalColumnAndHomogeneity) {
  const PhaseModel pm(standard_heisenberg(2));
  ChartSampler sampler(pm, 9);
  for (int k = 0; k < 10; ++k) {
    const ChartPoint p = sampler.diagonal();
    Vec expected = Vec::Zero(6);
    expected(3) = 1.0;
    expected(5) = -1.0;
    EXPECT_LE((xi_y(pm, p.x, p.t, p.y).col(3) - expected).norm(), 1e-15);
    Vec y2 = p.y;
    y2.tail(2) *= 2.0;
    EXPECT_NEAR(phi(pm, p.x, p.t, y2), 2.0 * phi(pm, p.x, p.t, p.y), 1e-12);
  }
}

TEST(Sigma, ValuesAndSolve) {
  const PhaseModel pm(standard_heisenberg(2));
  Vec x = Vec::Zero(5);
  x(3) = 1.0;
  x(4) = 0.4;
  Vec y = Vec::Zero(5);
  y(3) = 0.8;
  y(4) = 1.3;
  EXPECT_DOUBLE_EQ(sigma_value(pm, x, 1.5, y), 0.8);
  Mat L(1, 4);
  L << 0.1, 0.2, -0.1, 0.3;
  const PhaseModel tilted(standard_heisenberg(2).with_lambda(L));
  ChartSampler sampler(tilted, 10);
  for (int k = 0; k < 20; ++k) {
    const ChartPoint p = sampler.fold();
    EXPECT_NEAR(sigma_value(tilted, p.x, p.t, p.y), 0.0, 1e-14);
    const Vec ybar = p.y.tail(1);
    const double expected = (p.t * tilted.structure().Lambda_theta(ybar) -
                             tilted.structure().J_theta(ybar).transpose() * p.x.head(4))(3);
    EXPECT_NEAR(p.y(3), expected, 1e-14);
    Vec a = p.y, b = p.y;
    a(3) += 0.3;
    b.tail(1) *= 1.7;
    Vec ab = a + b;
    EXPECT_NEAR(sigma_value(tilted, p.x, p.t, ab), sigma_value(tilted, p.x, p.t, a) + sigma_value(tilted, p.x, p.t, b),
                1e-12);
  }
}

TEST(Rank, GenericFoldAndDeterminant) {
  const PhaseModel pm(standard_heisenberg(2));
  ChartSampler sampler(pm, 7);
  for (int k = 0; k < 100; ++k) {
    const ChartPoint p = sampler.generic();
    const HessianRank r = mixed_hessian_rank(pm, p.x, p.t, p.y);
    EXPECT_EQ(r.full.rank, 5);
    EXPECT_GT(r.full.singular_values.back(), 1e-6 * r.full.singular_values.front());
    const double a = pi_xi_y_det(pm, p.x, p.t, p.y), b = reduced_det(pm, p.x, p.t, p.y);
    EXPECT_LE(std::abs(a - b), 1e-8 * std::abs(a));
  }
  for (int k = 0; k < 50; ++k) {
    const ChartPoint p = sampler.fold();
    const HessianRank r = mixed_hessian_rank(pm, p.x, p.t, p.y);
    EXPECT_EQ(r.full.rank, 5);
    EXPECT_EQ(r.spatial.rank, 4);
    EXPECT_LT(r.spatial.singular_values.back(), 1e-8 * r.spatial.singular_values.front());
    EXPECT_LE(std::abs(pi_xi_y_det(pm, p.x, p.t, p.y)), 1e-10);
    EXPECT_LE(std::abs(reduced_det(pm, p.x, p.t, p.y)), 1e-10);
  }
}

TEST(Normal, ResidualsAndDiagonalRelations) {
  for (const MetivierStructure& s : {standard_heisenberg(2), quaternionic_htype(1, 3)}) {
    const PhaseModel pm(s);
    ChartSampler sampler(pm, 11);
    const int n2 = 2 * s.n(), k = n2 - 1, d = s.d();
    for (int r = 0; r < 30; ++r) {
      const ChartPoint p = sampler.diagonal();
      const Vec N = normal_vector(pm, p.x, p.t, p.y);
      EXPECT_NEAR(N.norm(), 1.0, 1e-14);
      EXPECT_GE(N(k), 0.0);
      EXPECT_LE((xi_y(pm, p.x, p.t, p.y).transpose() * N).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_NEAR(N(k), N(d), 1e-10);
      const double sigma = sigma_value(pm, p.x, p.t, p.y);
      const Vec lhs = s.J_theta(p.y.tail(s.m())).transpose() * N.head(n2);
      for (int j = 0; j < k; ++j) EXPECT_NEAR(lhs(j), sigma * N(j) / p.t, 1e-10);
    }
  }
}

TEST(Curvature, RankBlockFormAndBound) {
  const PhaseModel pm(standard_heisenberg(2));
  ChartSampler sampler(pm, 7);
  for (int r = 0; r < 100; ++r) {
    const ChartPoint p = sampler.diagonal();
    const Vec N = normal_vector(pm, p.x, p.t, p.y);
    const CurvatureMatrix cm = curvature_matrix(pm, p.x, p.t, p.y, N);
    EXPECT_EQ(cm.rank.rank, 4);
    const Mat block = curvature_block_form(pm, p.x, p.t, p.y, N);
    EXPECT_LE((cm.matrix - block).cwiseAbs().maxCoeff(), 1e-6);
    for (int j = 0; j < 3; ++j) {
      for (int l = 0; l < 3; ++l) {
        if (j != l) EXPECT_LE(std::abs(cm.matrix(j, l)), 1e-6);
      }
    }
    const double c = c_value(pm, p.x, p.t, p.y, N);
    EXPECT_NEAR(cm.matrix(0, 0), c, 1e-6);
    EXPECT_GE(std::abs(c), c_lower_bound(pm, p.t, p.y.tail(1), N) - 1e-8);
  }
}

TEST(Curvature, CertifyPointReport) {
  const PhaseModel pm(quaternionic_htype(1, 2));
  ChartSampler sampler(pm, 3);
  const CurvatureReport r = certify_point(pm, sampler.diagonal());
  EXPECT_EQ(r.rank_xi, 6);
  EXPECT_EQ(r.rank_curv, 5);
  EXPECT_NEAR(r.normal.norm(), 1.0, 1e-14);
  EXPECT_GE(std::abs(r.c_value), r.c_bound - 1e-8);
}

TEST(FoldCone, RankAndBlockStructure) {
  for (const MetivierStructure& s : {standard_heisenberg(2), quaternionic_htype(1, 2)}) {
    const PhaseModel pm(s);
    ChartSampler sampler(pm, 13);
    const int n2 = 2 * s.n(), k = n2 - 1, d = s.d();
    for (int r = 0; r < 30; ++r) {
      const ChartPoint p = sampler.diagonal_fold();
      const FoldCone fc = fold_cone_curvature(pm, p.x, p.t, p.y.head(k), p.y.tail(s.m()));
      EXPECT_EQ(fc.rank.rank, d - 2);
      EXPECT_LT(fc.rank.singular_values[static_cast<std::size_t>(d - 2)],
                kRankTolerance * fc.rank.singular_values.front());
      EXPECT_GT(std::abs(fc.gamma), 1e-3);
      EXPECT_LE((fc.curvature - fc.block_form).cwiseAbs().maxCoeff(), 1e-6);
      for (int i = 0; i < s.m(); ++i) {
        EXPECT_LE((fc.M.col(i) + s.J(i) * fc.normal.head(n2)).norm(), 1e-6);
      }
    }
  }
}

TEST(FoldCone, Errors) {
  const PhaseModel pm(standard_heisenberg(2));
  Vec x = Vec::Zero(5);
  x(3) = 1.0;
  EXPECT_THROW(fold_cone_curvature(pm, x, 1.5, Vec::Zero(3), Vec::Zero(1)), DomainError);
  EXPECT_THROW(fold_cone_curvature(pm, x, 1.5, Vec::Zero(2), Vec::Ones(1)), DomainError);
}

TEST(Fold, Transversality) {
  const PhaseModel pm(standard_heisenberg(2));
  ChartSampler sampler(pm, 7);
  const Mat& J = pm.structure().J(0);
  for (int r = 0; r < 50; ++r) {
    const ChartPoint p = sampler.diagonal_fold();
    const FoldTransversality ft = fold_transversality(pm, p.x, p.t, p.y);
    EXPECT_GT(std::abs(ft.left), 1e-6);
    EXPECT_GT(std::abs(ft.right), 1e-6);
    const Vec& b = ft.kernel;
    const Mat Jy = p.y(4) * J;
    Vec pb = Vec::Zero(4);
    pb.head(3) = b.head(3);
    EXPECT_NEAR(b(3), -(Jy * pb)(3), 1e-10);
    EXPECT_NEAR(b(4), 0.0, 1e-10);
    Vec y = p.y;
    y(3) += 1e-3;
    EXPECT_NEAR((sigma_value(pm, p.x, p.t, y) - sigma_value(pm, p.x, p.t, p.y)) / 1e-3, 1.0, 1e-9);
  }
  const ChartPoint g = sampler.generic();
  EXPECT_THROW(fold_transversality(pm, g.x, g.t, g.y), DegenerateInputError);
}
