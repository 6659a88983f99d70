#include "hsm/oscillatory.hpp"

#include "hsm/errors.hpp"

#include <cmath>
#include <functional>
#include <type_traits>

namespace hsm {

namespace {

constexpr double kStep = 1e-4;

// Central difference refined once by Richardson extrapolation.
template <class F>
auto derivative(F&& f, double step = kStep) {
  using R = std::decay_t<decltype(f(0.0))>;
  auto central = [&](double h) -> R { return (f(h) - f(-h)) / (2.0 * h); };
  const R coarse = central(step);
  const R fine = central(0.5 * step);
  return R((4.0 * fine - coarse) / 3.0);
}

void check_sizes(const PhaseModel& pm, const Vec& x, const Vec& y) {
  if (x.size() != pm.d() || y.size() != pm.d()) throw DomainError("chart point has the wrong dimension");
}

// c_i = (ubar x^T J_i - t Lambda_i) e_{2n}.
Vec c_coefficients(const PhaseModel& pm, const Vec& x, double t) {
  const MetivierStructure& s = pm.structure();
  const int n2 = 2 * s.n();
  const Vec ux = x.head(n2);
  Vec c(s.m());
  for (int i = 0; i < s.m(); ++i) c(i) = (s.J(i).transpose() * ux)(n2 - 1) - t * s.Lambda()(i, n2 - 1);
  return c;
}

Vec unit(int dim, int k) { return Vec::Unit(dim, k); }

}  // namespace

PhaseModel::PhaseModel(MetivierStructure s) : s_(std::move(s)) {}

double PhaseModel::g(const Vec& w) {
  const double r2 = w.squaredNorm();
  if (r2 >= 1.0) throw DomainError("chart variable outside the unit ball");
  return std::sqrt(1.0 - r2);
}

Vec PhaseModel::grad_g(const Vec& w) { return -w / g(w); }

Mat PhaseModel::hess_g(const Vec& w) {
  const double gw = g(w);
  return -Mat::Identity(w.size(), w.size()) / gw - w * w.transpose() / (gw * gw * gw);
}

double PhaseModel::h(const Vec& w) { return -1.0 / g(w); }

Vec PhaseModel::grad_h(const Vec& w) {
  const double gw = g(w);
  return -w / (gw * gw * gw);
}

Vec PhaseModel::chart_variable(const Vec& x, double t, const Vec& y) const {
  check_sizes(*this, x, y);
  if (!(t > 0.0)) throw DomainError("chart needs t > 0");
  const int k = 2 * n() - 1;
  Vec w = (x.head(k) - y.head(k)) / t;
  if (w.squaredNorm() >= 1.0) throw DomainError("|x' - y'| / t >= 1 is outside the chart");
  return w;
}

DefiningValues defining_functions(const PhaseModel& pm, const Vec& x, double t, const Vec& y) {
  const MetivierStructure& s = pm.structure();
  const int n2 = 2 * s.n(), k = n2 - 1;
  const Vec w = pm.chart_variable(x, t, y);
  const double gw = PhaseModel::g(w);
  Vec q = Vec::Zero(n2);
  q.head(k) = y.head(k);
  q(k) = -t * gw;
  const Vec ux = x.head(n2);
  DefiningValues out;
  out.s2n = x(k) - t * gw;
  out.sbar.resize(s.m());
  for (int i = 0; i < s.m(); ++i) {
    out.sbar(i) = x(n2 + i) + ux.dot(s.J(i) * q) - t * s.Lambda().row(i).dot(q);
  }
  return out;
}

double phi(const PhaseModel& pm, const Vec& x, double t, const Vec& y) {
  const int n2 = 2 * pm.n();
  const DefiningValues v = defining_functions(pm, x, t, y);
  return y(n2 - 1) * v.s2n + y.tail(pm.m()).dot(v.sbar);
}

Vec xi(const PhaseModel& pm, const Vec& x, double t, const Vec& y) {
  const MetivierStructure& s = pm.structure();
  const int n2 = 2 * s.n(), k = n2 - 1, d = s.d(), m = s.m();
  const Vec w = pm.chart_variable(x, t, y);
  const double gw = PhaseModel::g(w), hw = PhaseModel::h(w);
  const Vec dg = PhaseModel::grad_g(w);
  Vec q = Vec::Zero(n2);
  q.head(k) = y.head(k);
  q(k) = -t * gw;
  const Vec c = c_coefficients(pm, x, t);
  const double y2n = y(k);
  Vec out = Vec::Zero(d + 1);
  out.head(k) = -y2n * dg;
  out(k) = y2n;
  out(d) = y2n * hw;
  for (int i = 0; i < m; ++i) {
    const double yi = y(n2 + i);
    const Vec Jq = s.J(i) * q;
    out.head(k) += yi * (Jq.head(k) - c(i) * dg);
    out(k) += yi * Jq(k);
    out(n2 + i) = yi;
    out(d) += yi * (-s.Lambda().row(i).dot(q) + c(i) * hw);
  }
  return out;
}

Mat xi_y(const PhaseModel& pm, const Vec& x, double t, const Vec& y) {
  const MetivierStructure& s = pm.structure();
  const int n2 = 2 * s.n(), k = n2 - 1, d = s.d(), m = s.m();
  const Vec w = pm.chart_variable(x, t, y);
  const double gw = PhaseModel::g(w), hw = PhaseModel::h(w);
  const Vec dg = PhaseModel::grad_g(w);
  const Mat hg = PhaseModel::hess_g(w);
  const Vec dh = PhaseModel::grad_h(w);
  Vec q = Vec::Zero(n2);
  q.head(k) = y.head(k);
  q(k) = -t * gw;
  const Vec c = c_coefficients(pm, x, t);
  const Vec ybar = y.tail(m);
  const Mat Jy = s.J_theta(ybar);
  const Vec Ly = s.Lambda_theta(ybar);
  const double sig = sigma_value(pm, x, t, y);
  Mat out = Mat::Zero(d + 1, d);
  for (int j = 0; j < k; ++j) {
    const Vec dq = unit(n2, j) + dg(j) * unit(n2, k);
    const Vec Jdq = Jy * dq;
    out.col(j).head(k) = sig / t * hg.col(j) + Jdq.head(k);
    out(k, j) = Jy(k, j);
    out(d, j) = -sig / t * dh(j) - Ly.dot(dq);
  }
  out.col(k).head(k) = -dg;
  out(k, k) = 1.0;
  out(d, k) = hw;
  for (int i = 0; i < m; ++i) {
    const Vec Jq = s.J(i) * q;
    out.col(n2 + i).head(k) = Jq.head(k) - c(i) * dg;
    out(k, n2 + i) = Jq(k);
    out(n2 + i, n2 + i) = 1.0;
    out(d, n2 + i) = -s.Lambda().row(i).dot(q) + c(i) * hw;
  }
  return out;
}

double sigma_value(const PhaseModel& pm, const Vec& x, double t, const Vec& y) {
  check_sizes(pm, x, y);
  const int n2 = 2 * pm.n();
  return y(n2 - 1) + y.tail(pm.m()).dot(c_coefficients(pm, x, t));
}

double solve_sigma_zero(const PhaseModel& pm, const Vec& x, double t, const Vec& ybar) {
  if (ybar.size() != pm.m()) throw DomainError("bar y has the wrong dimension");
  return -ybar.dot(c_coefficients(pm, x, t));
}

double pi_xi_y_det(const PhaseModel& pm, const Vec& x, double t, const Vec& y) {
  const Mat full = xi_y(pm, x, t, y);
  return full.topRows(pm.d()).determinant();
}

double reduced_det(const PhaseModel& pm, const Vec& x, double t, const Vec& y) {
  const MetivierStructure& s = pm.structure();
  const int n2 = 2 * s.n(), k = n2 - 1;
  const Vec w = pm.chart_variable(x, t, y);
  const Mat Jy = s.J_theta(y.tail(s.m()));
  const Mat B = Jy.col(k).head(k) * PhaseModel::grad_g(w).transpose();
  const Mat R = sigma_value(pm, x, t, y) / t * PhaseModel::hess_g(w) + Jy.topLeftCorner(k, k) + B - B.transpose();
  return R.determinant();
}

HessianRank mixed_hessian_rank(const PhaseModel& pm, const Vec& x, double t, const Vec& y, double tol) {
  const Mat full = xi_y(pm, x, t, y);
  return {rank_with_tolerance(full, tol), rank_with_tolerance(full.topRows(pm.d()), tol)};
}

Vec normal_vector(const PhaseModel& pm, const Vec& x, double t, const Vec& y) {
  const Mat full = xi_y(pm, x, t, y);
  Eigen::JacobiSVD<Mat> svd(full, Eigen::ComputeFullU);
  const Vec sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > kRankTolerance * sv(0))) {
    throw DegenerateInputError("Xi_y is rank deficient, the normal is undefined");
  }
  Vec N = svd.matrixU().col(pm.d());
  if (N(2 * pm.n() - 1) < 0.0) N = -N;
  return N;
}

CurvatureMatrix curvature_matrix(const PhaseModel& pm, const Vec& x, double t, const Vec& y, const Vec& N,
                                 double tol) {
  const int d = pm.d();
  Mat K(d, d);
  for (int l = 0; l < d; ++l) {
    const Vec e = unit(d, l);
    const Vec col = derivative([&](double h) -> Vec { return xi_y(pm, x, t, y + h * e).transpose() * N; });
    K.col(l) = col;
  }
  CurvatureMatrix out;
  out.matrix = 0.5 * (K + K.transpose());
  out.rank = rank_with_tolerance(out.matrix, tol);
  return out;
}

Mat curvature_block_form(const PhaseModel& pm, const Vec& x, double t, const Vec& y, const Vec& N) {
  const MetivierStructure& s = pm.structure();
  const int n2 = 2 * s.n(), k = n2 - 1, d = s.d(), m = s.m();
  const Vec cc = c_coefficients(pm, x, t);
  const Vec ua = N.head(n2);
  const double cv = c_value(pm, x, t, y, N);
  Mat C = Mat::Zero(d, d);
  for (int j = 0; j < k; ++j) {
    C(j, j) = cv;
    C(j, k) = C(k, j) = -N(j) / t;
    for (int i = 0; i < m; ++i) {
      const double a = -cc(i) * N(j) / t + (s.J(i).transpose() * ua)(j) - N(d) * s.Lambda()(i, j);
      C(j, n2 + i) = C(n2 + i, j) = a;
    }
  }
  return C;
}

double c_value(const PhaseModel& pm, const Vec& x, double t, const Vec& y, const Vec& N) {
  const MetivierStructure& s = pm.structure();
  const int n2 = 2 * s.n(), d = s.d();
  const Vec ybar = y.tail(s.m());
  const Vec ua = N.head(n2);
  const double sig = sigma_value(pm, x, t, y);
  return (s.J_theta(ybar).transpose() * ua)(n2 - 1) / t - N(d) * sig / (t * t) -
         N(d) * s.Lambda_theta(ybar)(n2 - 1) / t;
}

double c_lower_bound(const PhaseModel& pm, double t, const Vec& ybar, const Vec& N) {
  const MetivierStructure& s = pm.structure();
  const double r = ybar.norm();
  if (!(r > 0.0)) return 0.0;
  const Vec th = ybar / r;
  const double gap = smallest_singular_value(s.J_theta(th)) - s.Lambda_theta(th).norm();
  return r * N.head(2 * s.n()).norm() * gap / t;
}

namespace {

// Tangent frame of the fold cone at parameters (y', bar y).
Mat fold_tangents(const PhaseModel& pm, const Vec& x, double t, const Vec& params) {
  const int n2 = 2 * pm.n(), k = n2 - 1, d = pm.d(), m = pm.m();
  const Vec ybar = params.tail(m);
  Vec y(d);
  y.head(k) = params.head(k);
  y(k) = solve_sigma_zero(pm, x, t, ybar);
  y.tail(m) = ybar;
  const Mat full = xi_y(pm, x, t, y).topRows(d);
  const Vec c = c_coefficients(pm, x, t);
  Mat T(d, d - 1);
  T.leftCols(k) = full.leftCols(k);
  for (int i = 0; i < m; ++i) T.col(k + i) = full.col(n2 + i) - c(i) * full.col(k);
  return T;
}

}  // namespace

FoldCone fold_cone_curvature(const PhaseModel& pm, const Vec& x, double t, const Vec& yprime, const Vec& ybar,
                             double tol) {
  const MetivierStructure& s = pm.structure();
  const int n2 = 2 * s.n(), k = n2 - 1, d = s.d(), m = s.m();
  if (yprime.size() != k || ybar.size() != m) throw DomainError("fold cone parameters have the wrong dimension");
  if (!(ybar.norm() > 0.0)) throw DomainError("fold cone needs bar y != 0");
  Vec params(d - 1);
  params << yprime, ybar;
  const Mat T = fold_tangents(pm, x, t, params);
  Eigen::JacobiSVD<Mat> svd(T, Eigen::ComputeFullU);
  const Vec sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > kRankTolerance * sv(0))) throw DegenerateInputError("degenerate fold-cone tangent frame");
  FoldCone out;
  out.normal = svd.matrixU().col(d - 1);
  if (out.normal(k) < 0.0) out.normal = -out.normal;
  Mat K(d - 1, d - 1);
  for (int l = 0; l < d - 1; ++l) {
    const Vec e = unit(d - 1, l);
    K.col(l) = derivative([&](double h) -> Vec { return fold_tangents(pm, x, t, params + h * e).transpose() * out.normal; });
  }
  out.curvature = 0.5 * (K + K.transpose());
  out.rank = rank_with_tolerance(out.curvature, tol);
  const Vec un = out.normal.head(n2);
  out.gamma = un.dot(s.J_theta(ybar) * unit(n2, k));
  out.M.resize(n2, m);
  for (int i = 0; i < m; ++i) out.M.col(i) = -s.J(i) * un;
  out.block_form = Mat::Zero(d - 1, d - 1);
  out.block_form.topLeftCorner(k, k) = out.gamma / t * Mat::Identity(k, k);
  out.block_form.topRightCorner(k, m) = out.M.topRows(k);
  out.block_form.bottomLeftCorner(m, k) = out.M.topRows(k).transpose();
  return out;
}

FoldTransversality fold_transversality(const PhaseModel& pm, const Vec& x, double t, const Vec& y, double tol) {
  const int d = pm.d();
  const Mat PX = xi_y(pm, x, t, y).topRows(d);
  Eigen::JacobiSVD<Mat> svd(PX, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();
  if (!(sv(d - 2) > tol * sv(0)) || sv(d - 1) > tol * sv(0)) {
    throw DegenerateInputError("Pi Xi_y does not have rank d - 1, not a fold point");
  }
  FoldTransversality out;
  out.kernel = svd.matrixV().col(d - 1);
  out.cokernel = svd.matrixU().col(d - 1);
  const int k = 2 * pm.n() - 1;
  if (out.kernel(k) < 0.0) out.kernel = -out.kernel;
  if (out.cokernel(k) < 0.0) out.cokernel = -out.cokernel;
  out.left = derivative([&](double h) { return pi_xi_y_det(pm, x, t, y + h * out.kernel); });
  out.right = derivative([&](double h) { return pi_xi_y_det(pm, x + h * out.cokernel, t, y); });
  return out;
}

ChartSampler::ChartSampler(const PhaseModel& pm, std::uint64_t seed) : pm_(&pm), rng_(seed) {}

Vec ChartSampler::ball(int dim, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Vec v(dim);
  do {
    for (int i = 0; i < dim; ++i) v(i) = normal(rng_);
  } while (v.norm() == 0.0);
  return v.normalized() * radius * std::pow(uni(rng_), 1.0 / dim);
}

ChartPoint ChartSampler::base(bool diagonal) {
  const int n2 = 2 * pm_->n(), k = n2 - 1, d = pm_->d(), m = pm_->m();
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  ChartPoint p;
  p.x = Vec::Zero(d);
  p.x.head(n2) = unit(n2, k) + ball(n2, 0.1);
  for (int i = 0; i < m; ++i) p.x(n2 + i) = 2.0 * uni(rng_) - 1.0;
  p.t = 1.0 + uni(rng_);
  p.y = Vec::Zero(d);
  p.y.head(k) = diagonal ? Vec(p.x.head(k)) : ball(k, 0.1);
  const Vec dir = ball(m, 1.0).normalized();
  p.y.tail(m) = dir * (0.5 + 1.5 * uni(rng_));
  return p;
}

ChartPoint ChartSampler::generic(double min_sigma) {
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  const int k = 2 * pm_->n() - 1;
  ChartPoint p = base(false);
  for (;;) {
    p.y(k) = uni(rng_);
    if (std::abs(sigma_value(*pm_, p.x, p.t, p.y)) > min_sigma) return p;
  }
}

ChartPoint ChartSampler::fold() {
  ChartPoint p = base(false);
  p.y(2 * pm_->n() - 1) = solve_sigma_zero(*pm_, p.x, p.t, p.y.tail(pm_->m()));
  return p;
}

ChartPoint ChartSampler::diagonal() {
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  ChartPoint p = base(true);
  p.y(2 * pm_->n() - 1) = uni(rng_);
  return p;
}

ChartPoint ChartSampler::diagonal_fold() {
  ChartPoint p = base(true);
  p.y(2 * pm_->n() - 1) = solve_sigma_zero(*pm_, p.x, p.t, p.y.tail(pm_->m()));
  return p;
}

CurvatureReport certify_point(const PhaseModel& pm, const ChartPoint& p, double tol) {
  CurvatureReport r;
  r.point = p;
  r.sigma = sigma_value(pm, p.x, p.t, p.y);
  const HessianRank hr = mixed_hessian_rank(pm, p.x, p.t, p.y, tol);
  r.singular_values_xi = hr.full.singular_values;
  r.rank_xi = hr.full.rank;
  if (r.rank_xi < pm.d()) return r;
  r.normal = normal_vector(pm, p.x, p.t, p.y);
  r.c_value = c_value(pm, p.x, p.t, p.y, r.normal);
  r.c_bound = c_lower_bound(pm, p.t, p.y.tail(pm.m()), r.normal);
  const CurvatureMatrix cm = curvature_matrix(pm, p.x, p.t, p.y, r.normal, tol);
  r.singular_values_curv = cm.rank.singular_values;
  r.rank_curv = cm.rank.rank;
  return r;
}

}  // namespace hsm
