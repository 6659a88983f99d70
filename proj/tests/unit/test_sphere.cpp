#include "hsm/errors.hpp"
#include "hsm/lattice.hpp"
#include "hsm/quadrature.hpp"
#include "hsm/sphere.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace hsm;

namespace {

Box cube(int d, double half) { return {Vec::Constant(d, -half), Vec::Constant(d, half)}; }

ScalarField constant_field(int d, double value, double half = 1e6) {
  return ScalarField("constant", cube(d, half), [value](std::span<const double>) { return value; });
}

double integrate(const SphereRule& rule, const std::function<double(const Vec&)>& g) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weight(i) * g(rule.node(i));
  return acc;
}

// Indicator of a ball of radius r around c in R^d.
ScalarField ball_field(const Vec& c, double r) {
  const int d = static_cast<int>(c.size());
  Box b{c.array() - r, c.array() + r};
  return ScalarField("ball", b, [c, r, d](std::span<const double> p) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += (p[static_cast<std::size_t>(k)] - c(k)) * (p[static_cast<std::size_t>(k)] - c(k));
    return s <= r * r ? 1.0 : 0.0;
  });
}

}  // namespace

TEST(Quadrature, GaussLegendreIntegratesPolynomials) {
  const GaussLegendre gl = gauss_legendre(6);
  double w = 0.0, x10 = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    w += gl.weights[i];
    x10 += gl.weights[i] * std::pow(gl.nodes[i], 10);
  }
  EXPECT_NEAR(w, 2.0, 1e-14);
  EXPECT_NEAR(x10, 2.0 / 11.0, 1e-14);
  EXPECT_THROW(gauss_legendre(0), DomainError);
}

TEST(SphereRule, WeightsAndNodes) {
  for (int n : {1, 2, 3}) {
    const SphereRule rule = sphere_rule(n, 16);
    EXPECT_NEAR(rule.weight_sum(), 1.0, 1e-12);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      EXPECT_NEAR(rule.node(i).norm(), 1.0, 1e-12);
      EXPECT_GT(rule.weight(i), 0.0);
    }
    EXPECT_EQ(rule.certified(), n <= 2);
  }
  EXPECT_THROW(sphere_rule(1, 3), DomainError);
  EXPECT_THROW(sphere_rule(2, 2), DomainError);
}

TEST(SphereRule, SecondMoments) {
  EXPECT_NEAR(integrate(sphere_rule(1, 16), [](const Vec& w) { return w(0) * w(0); }), 0.5, 1e-12);
  const SphereRule s3 = sphere_rule(2, 16);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(integrate(s3, [k](const Vec& w) { return w(k) * w(k); }), 0.25, 1e-10);
  }
  // Fourth moment of S^3: E[w_1^4] = 1/8.
  EXPECT_NEAR(integrate(s3, [](const Vec& w) { return std::pow(w(0), 4); }), 0.125, 1e-10);
}

TEST(SphereRule, GradedCapRuleIsNormalized) {
  const std::vector<double> edges{0.0, 0.01, 0.1, 1.0, std::numbers::pi};
  for (int n : {1, 2}) {
    Vec c = Vec::Zero(2 * n);
    c(0) = 1.0;
    const SphereRule rule = graded_cap_rule(n, c, edges, 8);
    EXPECT_NEAR(rule.weight_sum(), 1.0, 1e-12);
    EXPECT_NEAR(integrate(rule, [](const Vec& w) { return w(1) * w(1); }), n == 1 ? 0.5 : 0.25, 1e-8);
  }
  EXPECT_THROW(graded_cap_rule(3, Vec::Unit(6, 0), edges, 8), UnsupportedError);
}

TEST(SphericalAverage, ConstantIsOne) {
  for (const MetivierStructure& s : {standard_heisenberg(1), standard_heisenberg(2), quaternionic_htype(1, 3)}) {
    const SphereRule rule = sphere_rule(s.n(), 16);
    const ScalarField one = constant_field(s.d(), 1.0);
    const GroupPoint x{Vec::Constant(2 * s.n(), 0.3), Vec::Constant(s.m(), -0.2)};
    EXPECT_NEAR(spherical_average(s, one, 1.5, x, rule), 1.0, 1e-12);
    EXPECT_NEAR(maximal_value(s, one, x, TimeSelector::grid(5), rule), 1.0, 1e-12);
  }
}

TEST(SphericalAverage, DisjointSupportGivesZero) {
  const MetivierStructure s = standard_heisenberg(1);
  const SphereRule rule = sphere_rule(1, 64);
  const ScalarField f = ball_field(Vec::Zero(3), 0.2);
  const GroupPoint x = identity_point(s);
  EXPECT_EQ(spherical_average(s, f, 1.5, x, rule), 0.0);
}

TEST(SphericalAverage, DimensionMismatch) {
  const MetivierStructure s = standard_heisenberg(1);
  EXPECT_THROW(spherical_average(s, constant_field(4, 1.0), 1.0, identity_point(s), sphere_rule(1, 8)),
               StructuralError);
  EXPECT_THROW(spherical_average(s, constant_field(3, 1.0), 1.0, identity_point(s), sphere_rule(2, 8)),
               StructuralError);
}

TEST(SphericalAverage, MatchesDefiningSum) {
  Mat L(1, 4);
  L << 0.1, -0.2, 0.05, 0.3;
  const MetivierStructure s = standard_heisenberg(2).with_lambda(L);
  const SphereRule rule = sphere_rule(2, 8);
  const ScalarField f("smooth", cube(5, 100.0), [](std::span<const double> p) {
    return std::sin(p[0] + 2 * p[1]) + p[2] * p[3] + std::cos(p[4]);
  });
  GroupPoint x{Vec(4), Vec(1)};
  x.ubar << 0.3, -0.1, 0.7, 0.2;
  x.bar << 0.4;
  const double t = 1.3;
  double expected = 0.0;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const Vec w = rule.node(j);
    GroupPoint y{x.ubar - t * w, x.bar - t * t * (L * w)};
    y.bar(0) -= t * x.ubar.dot(s.J(0) * w);
    expected += rule.weight(j) * f(y);
  }
  EXPECT_NEAR(spherical_average(s, f, t, x, rule, Pruning::Disabled), expected, 1e-13);
}

TEST(SphericalAverage, PruningDoesNotChangeValues) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  for (int n : {1, 2}) {
    const MetivierStructure s = standard_heisenberg(n);
    const SphereRule rule = sphere_rule(n, 48);
    for (int k = 0; k < 40; ++k) {
      Vec c(s.d());
      for (int i = 0; i < s.d(); ++i) c(i) = uni(rng);
      const ScalarField f = ball_field(c, 0.4);
      const GroupPoint x = identity_point(s);
      const double pruned = spherical_average(s, f, 1.2, x, rule, Pruning::Enabled);
      const double full = spherical_average(s, f, 1.2, x, rule, Pruning::Disabled);
      EXPECT_NEAR(pruned, full, 1e-14);
    }
  }
}

TEST(SphericalAverage, Monotonicity) {
  const MetivierStructure s = standard_heisenberg(2);
  const SphereRule rule = sphere_rule(2, 24);
  const Vec c = (Vec(5) << 1.0, 0.2, -0.3, 0.4, 0.1).finished();
  const ScalarField small = ball_field(c, 0.3), big = ball_field(c, 0.6);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uni(-0.5, 0.5), tdist(1.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    GroupPoint x{Vec(4), Vec(1)};
    for (int i = 0; i < 4; ++i) x.ubar(i) = uni(rng);
    x.bar(0) = uni(rng);
    const double t = tdist(rng);
    EXPECT_LE(spherical_average(s, small, t, x, rule), spherical_average(s, big, t, x, rule));
  }
}

TEST(SphericalAverage, RotationCovariance) {
  const MetivierStructure s = standard_heisenberg(1);
  const int K = 96;
  const SphereRule rule = sphere_rule(1, K);
  const double a = 2.0 * std::numbers::pi * 3.0 / K;
  Mat R(2, 2);
  R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  ASSERT_LE((R * s.J(0) - s.J(0) * R).norm(), 1e-15);
  const auto g = [](std::span<const double> p) {
    return std::exp(-p[0] * p[0] - 2 * (p[1] - 0.3) * (p[1] - 0.3)) * std::cos(p[2]);
  };
  const ScalarField f("smooth", cube(3, 100.0), g);
  const Mat Rt = R.transpose();
  const ScalarField rotated("rotated", cube(3, 200.0), [g, Rt](std::span<const double> p) {
    const Vec u = Rt * Vec((Vec(2) << p[0], p[1]).finished());
    const double q[3] = {u(0), u(1), p[2]};
    return g(std::span<const double>(q, 3));
  });
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    GroupPoint x{Vec(2), Vec(1)};
    x.ubar << uni(rng), uni(rng);
    x.bar << uni(rng);
    const GroupPoint rx{R * x.ubar, x.bar};
    EXPECT_NEAR(spherical_average(s, f, 1.4, x, rule), spherical_average(s, rotated, 1.4, rx, rule), 1e-10);
  }
}

TEST(MaximalValue, DominatesEveryGridTime) {
  const MetivierStructure s = standard_heisenberg(1);
  const SphereRule rule = sphere_rule(1, 256);
  const ScalarField f = ball_field((Vec(3) << 1.4, 0.0, 0.0).finished(), 0.2);
  const TimeSelector sel = TimeSelector::grid(9);
  const GroupPoint x = identity_point(s);
  const double m = maximal_value(s, f, x, sel, rule);
  EXPECT_GT(m, 0.0);
  for (int k = 0; k < sel.count(); ++k) EXPECT_GE(m, spherical_average(s, f, sel.grid_time(k), x, rule));
}

TEST(TimeSelector, ClampsAndValidates) {
  const TimeSelector a = TimeSelector::analytic("norm", [](std::span<const double> p) { return p[0]; });
  const double lo[1] = {0.2}, hi[1] = {7.0}, mid[1] = {1.3};
  EXPECT_EQ(a.time_for(std::span<const double>(lo, 1)), 1.0);
  EXPECT_EQ(a.time_for(std::span<const double>(hi, 1)), 2.0);
  EXPECT_EQ(a.time_for(std::span<const double>(mid, 1)), 1.3);
  EXPECT_THROW(TimeSelector::grid(1), DomainError);
  EXPECT_THROW(TimeSelector::fixed(2.5), DomainError);
  const TimeSelector g = TimeSelector::grid(3);
  EXPECT_EQ(g.grid_time(0), 1.0);
  EXPECT_EQ(g.grid_time(2), 2.0);
}

TEST(LpNorm, IndicatorOfBox) {
  const Box big{Vec::Constant(2, 0.0), Vec::Constant(2, 2.0)};
  const auto indicator = [](std::span<const double> p) { return (p[0] <= 1.0 && p[1] <= 0.5) ? 1.0 : 0.0; };
  for (double p : {1.0, 2.0, 3.5}) {
    EXPECT_NEAR(lp_norm(indicator, p, big, {64, 64}) / std::pow(0.5, 1.0 / p), 1.0, 0.02);
  }
  EXPECT_EQ(lp_norm(indicator, std::numeric_limits<double>::infinity(), big, {64, 64}), 1.0);
  const Box empty{Vec::Zero(2), Vec::Zero(2)};
  EXPECT_THROW(lp_norm(indicator, 1.0, empty, {4, 4}), DomainError);
}

TEST(LpNorm, ScalingLaw) {
  const Box box{Vec::Constant(3, -1.0), Vec::Constant(3, 1.0)};
  const auto f = [](std::span<const double> p) { return std::exp(-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])); };
  const double delta = 0.5;
  const auto fd = [&](std::span<const double> p) {
    const double q[3] = {p[0] / delta, p[1] / delta, p[2] / delta};
    return f(std::span<const double>(q, 3));
  };
  const Box small{Vec::Constant(3, -delta), Vec::Constant(3, delta)};
  for (double p : {1.0, 2.0}) {
    const double base = lp_norm(f, p, box, {40, 40, 40});
    EXPECT_NEAR(lp_norm(fd, p, small, {40, 40, 40}), std::pow(delta, 3.0 / p) * base, 1e-12 * base);
  }
}

TEST(LpNorm, HomogeneityAndValidation) {
  const std::vector<double> v{1.0, -2.0, 0.5}, w{0.25, 0.5, 0.25};
  const std::vector<double> v3{3.0, -6.0, 1.5};
  for (double p : {1.0, 2.0, std::numeric_limits<double>::infinity()}) {
    EXPECT_DOUBLE_EQ(lp_norm(v3, w, p), 3.0 * lp_norm(v, w, p));
  }
  EXPECT_EQ(lp_norm(v, w, std::numeric_limits<double>::infinity()), 2.0);
  EXPECT_THROW(lp_norm(v, w, 0.5), DomainError);
  EXPECT_THROW(lp_norm(v, std::vector<double>{1.0}, 1.0), StructuralError);
}

TEST(Slab, BoxLatticeMeasure) {
  const Slab slab = Slab::box(Box{Vec::Zero(2), (Vec(2) << 2.0, 3.0).finished()}, {4, 6});
  EXPECT_NEAR(slab.measure(), 6.0, 1e-12);
  EXPECT_NEAR(slab.measure(2.0), 6.0, 1e-12);
  EXPECT_EQ(slab.lattice(2.0).size(), 96u);
  EXPECT_THROW(slab.lattice(0.0), DomainError);
}
