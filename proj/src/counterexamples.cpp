#include "hsm/counterexamples.hpp"

#include "hsm/errors.hpp"
#include "hsm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace hsm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInflate = 1e-9;

void require_scale(double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) {
    throw DomainError("normalized scale must lie in (0, 1], got " + std::to_string(scale));
  }
}

void require_sphere_dim(const MetivierStructure& s, std::string_view family) {
  if (s.n() > 2) {
    throw UnsupportedError(std::string(family) + " family is implemented for n = 1 and n = 2");
  }
}

int count(double base, double refinement) {
  return std::max(1, static_cast<int>(std::lround(base * refinement)));
}

double max_norm(const std::vector<Mat>& J) {
  double best = 0.0;
  for (const Mat& Ji : J) best = std::max(best, spectral_norm(Ji));
  return best;
}

// Parameters of a direction on S^{2n-1}: the angle for n = 1 and Hopf
// coordinates (z, xi1, xi2) for n = 2, with the density of the unnormalized
// surface measure.
std::vector<LatticeAxis> direction_axes(int n, int base) {
  if (n == 1) return {{0.0, 2.0 * kPi, 4 * base}};
  return {{-1.0, 1.0, std::max(2, base / 2)}, {0.0, 2.0 * kPi, base}, {0.0, 2.0 * kPi, base}};
}

std::size_t direction_param_count(int n) { return n == 1 ? 1 : 3; }

double direction_density(int n) { return n == 1 ? 1.0 : 0.25; }

void direction(int n, const double* q, double* theta) {
  if (n == 1) {
    theta[0] = std::cos(q[0]);
    theta[1] = std::sin(q[0]);
    return;
  }
  const double c = std::sqrt(0.5 * (1.0 + q[0])), s = std::sqrt(0.5 * (1.0 - q[0]));
  theta[0] = c * std::cos(q[1]);
  theta[1] = c * std::sin(q[1]);
  theta[2] = s * std::cos(q[2]);
  theta[3] = s * std::sin(q[2]);
}

// Cube axes [-radius, radius]^k sampled for a ball mask.
void append_ball_axes(std::vector<LatticeAxis>& axes, int k, double radius, int per_axis) {
  for (int i = 0; i < k; ++i) axes.push_back({-radius, radius, per_axis});
}

bool in_ball(const double* q, int k, double radius) {
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += q[i] * q[i];
  return sum <= radius * radius;
}

// Polar slab: ubar = r theta, bar = center(r, theta) + s with s in the
// m-ball of the given radius.
using BarCenter = std::function<void(double r, const double* theta, double* bar)>;

Slab shell_slab(std::string label, const MetivierStructure& st, LatticeAxis r_axis, int dir_base,
                double s_radius, int s_count, BarCenter center) {
  const int n = st.n(), m = st.m(), n2 = 2 * n;
  std::vector<LatticeAxis> axes{r_axis};
  for (const LatticeAxis& a : direction_axes(n, dir_base)) axes.push_back(a);
  append_ball_axes(axes, m, s_radius, s_count);
  const std::size_t nd = direction_param_count(n);
  auto map = [n, n2, m, nd, center](std::span<const double> q, std::span<double> out) {
    double theta[4];
    direction(n, q.data() + 1, theta);
    for (int k = 0; k < n2; ++k) out[static_cast<std::size_t>(k)] = q[0] * theta[k];
    center(q[0], theta, out.data() + n2);
    for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(n2 + i)] += q[1 + nd + static_cast<std::size_t>(i)];
  };
  auto density = [n, m, nd, s_radius](std::span<const double> q) {
    if (!in_ball(q.data() + 1 + nd, m, s_radius)) return 0.0;
    return std::pow(q[0], 2 * n - 1) * direction_density(n);
  };
  return Slab(std::move(label), st.d(), std::move(axes), map, density);
}

Box symmetric_box(const Vec& half_widths) {
  return Box{-half_widths, half_widths}.inflated(kInflate);
}

// Circle or Hopf rule with enough nodes across a cap whose angular diameter
// is at least cap_angle in every Hopf angle and lat_angle in 2 eta.
SphereRule cap_rule(int n, int cap_nodes, double cap_angle, double lat_angle) {
  const int k_angle = std::max(64, static_cast<int>(std::ceil(2.0 * kPi * cap_nodes / cap_angle)));
  if (n == 1) return SphereRule::circle(k_angle);
  const int k_lat = std::max(16, static_cast<int>(std::ceil(kPi * cap_nodes / lat_angle)));
  return SphereRule::hopf(k_lat, k_angle, k_angle);
}

// Unit vectors spanning the orthogonal complement of u and v.
std::vector<Vec> complement_basis(const Vec& u, const Vec& v) {
  std::vector<Vec> basis{u, v};
  std::vector<Vec> out;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    Vec e = Vec::Unit(u.size(), k);
    for (const Vec& b : basis) e -= e.dot(b) * b;
    if (e.norm() > 1e-6) {
      e.normalize();
      basis.push_back(e);
      out.push_back(e);
    }
  }
  return out;
}

ExampleInstance build(Family family, const MetivierStructure& s, double delta, double scale, double constant,
                      ScalarField field, Slab domain, Slab test, TimeSelector sel, SphereRule rule) {
  return ExampleInstance{family,          s,     delta,          scale,         constant, std::move(field),
                         std::move(domain), std::move(test), std::move(sel), std::move(rule)};
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Ball: return "ball";
    case Family::Scaling: return "scaling";
    case Family::Knapp: return "knapp";
    case Family::SteinDensity: return "stein";
    case Family::MomentCurve: return "moment";
  }
  return "ball";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::Ball, Family::Scaling, Family::Knapp, Family::SteinDensity, Family::MomentCurve}) {
    if (to_string(f) == name) return f;
  }
  throw DomainError("unknown family '" + std::string(name) + "'");
}

double family_constant(Family f, const MetivierStructure& s) {
  switch (f) {
    case Family::Ball: return 10.0 * (1.0 + spectral_norm(s.Lambda()) + max_norm(s.Js()));
    case Family::Scaling: {
      double sum = 0.0;
      for (const Mat& Ji : s.Js()) sum += spectral_norm(Ji);
      return 10.0 * sum;
    }
    case Family::Knapp: return 10.0 * (2.0 + spectral_norm(s.Lambda()));
    case Family::SteinDensity:
    case Family::MomentCurve: return 1.0;
  }
  return 1.0;
}

ExampleInstance ball_example(const MetivierStructure& s, double scale, const ExampleOptions& opt) {
  require_scale(scale);
  require_sphere_dim(s, "ball");
  const int n = s.n(), m = s.m(), d = s.d(), n2 = 2 * n;
  const double C = family_constant(Family::Ball, s);
  const double delta = scale / C;
  const double R = 10.0 * delta;
  ScalarField field("indicator of the ball of radius 10 delta", symmetric_box(Vec::Constant(d, R)),
                    [R](std::span<const double> y) {
                      double sum = 0.0;
                      for (double v : y) sum += v * v;
                      return sum <= R * R ? 1.0 : 0.0;
                    });
  std::vector<LatticeAxis> cube;
  append_ball_axes(cube, d, R, count(16, opt.lattice_refinement));
  Slab domain(
      "ball of radius 10 delta", d, cube,
      [](std::span<const double> q, std::span<double> out) { std::copy(q.begin(), q.end(), out.begin()); },
      [d, R](std::span<const double> q) { return in_ball(q.data(), d, R) ? 1.0 : 0.0; });
  const Mat Lambda = s.Lambda();
  Slab test = shell_slab(
      "1 <= |ubar x| <= 2 band around |ubar x| Lambda ubar x", s,
      {9.0 / 8.0, 15.0 / 8.0, count(4, opt.lattice_refinement)}, count(4, opt.lattice_refinement),
      delta / C, count(8, opt.lattice_refinement), [Lambda, n2, m](double r, const double* theta, double* bar) {
        for (int i = 0; i < m; ++i) {
          double v = 0.0;
          for (int k = 0; k < n2; ++k) v += Lambda(i, k) * theta[k];
          bar[i] = r * r * v;
        }
      });
  TimeSelector sel = TimeSelector::analytic("t(x) = |ubar x|", [n2](std::span<const double> x) {
    double sum = 0.0;
    for (int k = 0; k < n2; ++k) sum += x[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
    return std::sqrt(sum);
  });
  // The cap |ubar x - t w| <= R has angular diameter at least R for t <= 2.
  SphereRule rule = cap_rule(n, opt.cap_nodes, R, R);
  return build(Family::Ball, s, delta, scale, C, std::move(field), std::move(domain), std::move(test),
               std::move(sel), std::move(rule));
}

ExampleInstance scaling_example(const MetivierStructure& s, double scale, double t, const ExampleOptions& opt) {
  require_scale(scale);
  require_sphere_dim(s, "scaling");
  if (!(t >= 1.0 && t <= 2.0)) throw DomainError("scaling family needs t in [1, 2]");
  const int n = s.n(), m = s.m(), d = s.d(), n2 = 2 * n;
  const double C = family_constant(Family::Scaling, s);
  const double delta = scale / C;
  const double w = C * delta;
  const Mat Lambda = s.Lambda();
  Vec half(d);
  half.head(n2).setConstant(t + w);
  half.tail(m).setConstant(t * spectral_norm(Lambda) * (t + w) + w);
  ScalarField field("indicator of the shell ||ubar y| - t| <= C0 delta, |bar y - t Lambda ubar y| <= C0 delta",
                    symmetric_box(half), [Lambda, n2, m, t, w](std::span<const double> y) {
                      double r2 = 0.0;
                      for (int k = 0; k < n2; ++k) r2 += y[static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(k)];
                      if (std::abs(std::sqrt(r2) - t) > w) return 0.0;
                      double c2 = 0.0;
                      for (int i = 0; i < m; ++i) {
                        double v = y[static_cast<std::size_t>(n2 + i)];
                        for (int k = 0; k < n2; ++k) v -= t * Lambda(i, k) * y[static_cast<std::size_t>(k)];
                        c2 += v * v;
                      }
                      return c2 <= w * w ? 1.0 : 0.0;
                    });
  auto tilt = [Lambda, n2, m, t](double r, const double* theta, double* bar) {
    for (int i = 0; i < m; ++i) {
      double v = 0.0;
      for (int k = 0; k < n2; ++k) v += Lambda(i, k) * theta[k];
      bar[i] = t * r * v;
    }
  };
  Slab domain = shell_slab("shell of width C0 delta", s, {t - w, t + w, count(16, opt.lattice_refinement)},
                           count(16, opt.lattice_refinement), w, count(16, opt.lattice_refinement), tilt);
  Slab test = shell_slab("|ubar x| <= delta, |bar x - t Lambda ubar x| <= delta", s,
                         {0.0, delta, count(8, opt.lattice_refinement)}, count(4, opt.lattice_refinement), delta,
                         count(8, opt.lattice_refinement), tilt);
  SphereRule rule = n == 1 ? SphereRule::circle(64) : SphereRule::hopf(16, 32, 32);
  return build(Family::Scaling, s, delta, scale, C, std::move(field), std::move(domain), std::move(test),
               TimeSelector::fixed(t), std::move(rule));
}

Mat KnappFrame::projection() const { return u * u.transpose() + v * v.transpose(); }

KnappFrame knapp_frame(const MetivierStructure& s) {
  if (s.m() != 1) throw UnsupportedError("knapp family requires m = 1");
  const Mat& J = s.J(0);
  const int n2 = 2 * s.n();
  if ((J * J + Mat::Identity(n2, n2)).cwiseAbs().maxCoeff() > 1e-12) {
    throw UnsupportedError("knapp family requires the normalized form J^2 = -I");
  }
  const Vec lam = s.Lambda().row(0).transpose();
  KnappFrame f;
  f.u = lam.norm() > 0.0 ? Vec(lam / lam.norm()) : Vec(Vec::Unit(n2, 0));
  f.v = (J * f.u).normalized();
  f.complement = complement_basis(f.u, f.v);
  return f;
}

ExampleInstance knapp_example(const MetivierStructure& s, double scale, const ExampleOptions& opt) {
  require_scale(scale);
  const KnappFrame frame = knapp_frame(s);
  require_sphere_dim(s, "knapp");
  const int n = s.n(), d = s.d(), n2 = 2 * n;
  const double C = family_constant(Family::Knapp, s);
  const double delta = scale / C;
  const Vec lam = s.Lambda().row(0).transpose();
  const Vec& u = frame.u;
  const Vec& v = frame.v;
  const std::vector<Vec>& perp = frame.complement;
  const int np = static_cast<int>(perp.size());
  const double thin = C * delta, thick = C * std::sqrt(delta);
  Vec half(d);
  for (int k = 0; k < n2; ++k) {
    const double in_v = std::hypot(u(k), v(k));
    half(k) = thin * in_v + thick * std::sqrt(std::max(0.0, 1.0 - in_v * in_v));
  }
  half(n2) = thin;
  Mat P(2 + np, n2);  // rows u, v, then the complement
  P.row(0) = u.transpose();
  P.row(1) = v.transpose();
  for (int k = 0; k < np; ++k) P.row(2 + k) = perp[static_cast<std::size_t>(k)].transpose();
  ScalarField field("indicator of the Knapp slab Q_delta", symmetric_box(half),
                    [P, n2, np, thin, thick](std::span<const double> y) {
                      if (std::abs(y[static_cast<std::size_t>(n2)]) > thin) return 0.0;
                      double a = 0.0, b = 0.0, c2 = 0.0;
                      for (int k = 0; k < n2; ++k) {
                        a += P(0, k) * y[static_cast<std::size_t>(k)];
                        b += P(1, k) * y[static_cast<std::size_t>(k)];
                      }
                      if (a * a + b * b > thin * thin) return 0.0;
                      for (int r = 0; r < np; ++r) {
                        double c = 0.0;
                        for (int k = 0; k < n2; ++k) c += P(2 + r, k) * y[static_cast<std::size_t>(k)];
                        c2 += c * c;
                      }
                      return c2 <= thick * thick ? 1.0 : 0.0;
                    });
  std::vector<LatticeAxis> axes;
  append_ball_axes(axes, 2, thin, count(16, opt.lattice_refinement));
  append_ball_axes(axes, np, thick, count(16, opt.lattice_refinement));
  axes.push_back({-thin, thin, count(16, opt.lattice_refinement)});
  Slab domain(
      "Knapp slab Q_delta", d, axes,
      [P, n2, np](std::span<const double> q, std::span<double> out) {
        for (int k = 0; k < n2; ++k) {
          double v = 0.0;
          for (int r = 0; r < 2 + np; ++r) v += q[static_cast<std::size_t>(r)] * P(r, k);
          out[static_cast<std::size_t>(k)] = v;
        }
        out[static_cast<std::size_t>(n2)] = q[static_cast<std::size_t>(2 + np)];
      },
      [np, thin, thick](std::span<const double> q) {
        return in_ball(q.data(), 2, thin) && in_ball(q.data() + 2, np, thick) ? 1.0 : 0.0;
      });
  // Test region: |pi x| = rho in [9/8 - delta, 15/8 + delta] inside a fixed
  // angular sector of V, |pi_perp x| <= sqrt(delta), |x_d - rho Lambda x| <= delta.
  const double sqd = std::sqrt(delta);
  std::vector<LatticeAxis> taxes{{9.0 / 8.0 - delta, 15.0 / 8.0 + delta, count(4, opt.lattice_refinement)},
                                 {std::acos(0.75), std::asin(0.75), count(4, opt.lattice_refinement)}};
  append_ball_axes(taxes, np, sqd, count(8, opt.lattice_refinement));
  taxes.push_back({-delta, delta, count(8, opt.lattice_refinement)});
  Slab test(
      "Knapp test region R_delta", d, taxes,
      [P, n2, np, lam](std::span<const double> q, std::span<double> out) {
        const double rho = q[0];
        double lx = 0.0;
        for (int k = 0; k < n2; ++k) {
          double v = rho * (std::cos(q[1]) * P(0, k) + std::sin(q[1]) * P(1, k));
          for (int r = 0; r < np; ++r) v += q[static_cast<std::size_t>(2 + r)] * P(2 + r, k);
          out[static_cast<std::size_t>(k)] = v;
          lx += lam(k) * v;
        }
        out[static_cast<std::size_t>(n2)] = rho * lx + q[static_cast<std::size_t>(2 + np)];
      },
      [np, sqd](std::span<const double> q) { return in_ball(q.data() + 2, np, sqd) ? q[0] : 0.0; });
  TimeSelector sel = TimeSelector::analytic("t(x) = |pi ubar x|", [u, v, n2](std::span<const double> x) {
    double a = 0.0, b = 0.0;
    for (int k = 0; k < n2; ++k) {
      a += u(k) * x[static_cast<std::size_t>(k)];
      b += v(k) * x[static_cast<std::size_t>(k)];
    }
    return std::hypot(a, b);
  });
  // The V-cap has angular width about 2 thin / t and the complementary
  // angles open up to about sqrt(thin).
  SphereRule rule = n == 1 ? cap_rule(1, opt.cap_nodes, thin, thin)
                           : cap_rule(2, opt.cap_nodes, 2.0 * std::sqrt(thin), 2.0 * thin);
  return build(Family::Knapp, s, delta, scale, C, std::move(field), std::move(domain), std::move(test),
               std::move(sel), std::move(rule));
}

ExampleInstance moment_example(double scale, const ExampleOptions& opt) {
  require_scale(scale);
  const MetivierStructure s = unit_heisenberg(1);
  const double delta = scale;
  const double d2 = delta * delta, d3 = d2 * delta;
  Vec half(3);
  half << 4.0 * d2, 2.0 * delta, 2.0 * delta + 8.0 * d3;
  ScalarField field("indicator of P_delta", symmetric_box(half), [delta, d2, d3](std::span<const double> y) {
    return std::abs(y[0]) <= 4.0 * d2 && std::abs(y[1]) <= 2.0 * delta && std::abs(y[2] + y[1]) <= 8.0 * d3 ? 1.0
                                                                                                           : 0.0;
  });
  const int c16 = count(16, opt.lattice_refinement), c8 = count(8, opt.lattice_refinement);
  Slab domain(
      "P_delta", 3, {{-4.0 * d2, 4.0 * d2, c16}, {-2.0 * delta, 2.0 * delta, c16}, {-8.0 * d3, 8.0 * d3, c16}},
      [](std::span<const double> q, std::span<double> out) {
        out[0] = q[0];
        out[1] = q[1];
        out[2] = q[2] - q[1];
      },
      [](std::span<const double>) { return 1.0; });
  Box vbox{Vec(3), Vec(3)};
  vbox.lo << 1.0 - d2, -delta, -d3;
  vbox.hi << 1.0 + d2, delta, d3;
  Slab test = Slab::box(vbox, {c8, c8, c8});
  SphereRule rule = SphereRule::circle(std::max(64, static_cast<int>(std::ceil(2.0 * kPi * opt.cap_nodes / delta))));
  return build(Family::MomentCurve, s, delta, scale, 1.0, std::move(field), std::move(domain), std::move(test),
               TimeSelector::fixed(1.0), std::move(rule));
}

ExampleInstance stein_example(const MetivierStructure& s, double alpha, double cutoff, const ExampleOptions& opt) {
  if (s.m() != 1) throw UnsupportedError("stein density requires m = 1");
  require_sphere_dim(s, "stein");
  const int n = s.n(), n2 = 2 * n, d = s.d();
  const double inv_p2 = (2.0 * n - 1.0) / (2.0 * n);
  if (!(alpha > inv_p2 && alpha < 1.0)) throw DomainError("stein density needs alpha in (1/p2, 1)");
  if (!(cutoff > 0.0 && cutoff < 0.5)) throw DomainError("stein cutoff must lie in (0, 1/2)");
  const double power = 2.0 * n - 1.0;
  Vec half(d);
  half.head(n2).setConstant(0.5);
  half(n2) = 1.0;
  ScalarField field("truncated Stein density", symmetric_box(half),
                    [n2, power, alpha, cutoff](std::span<const double> y) {
                      double r2 = 0.0;
                      for (int k = 0; k < n2; ++k) r2 += y[static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(k)];
                      const double r = std::sqrt(r2);
                      if (r < cutoff || r > 0.5 || std::abs(y[static_cast<std::size_t>(n2)]) > 1.0) return 0.0;
                      return std::pow(r, -power) * std::pow(-std::log(r), -alpha);
                    });
  // Log-polar lattice: with u = log r the measure r^{2n-1} dr becomes
  // r^{2n} du. Cells are aligned with multiples of log 2 so that refining
  // the cutoff by powers of two only appends cells.
  const double ln2 = std::numbers::ln2;
  const double u_lo = std::log(cutoff), u_hi = -ln2;
  const int per_octave = count(32, opt.lattice_refinement);
  const int u_count = std::max(1, static_cast<int>(std::lround((u_hi - u_lo) / ln2 * per_octave)));
  std::vector<LatticeAxis> axes{{u_lo, u_hi, u_count}};
  for (const LatticeAxis& a : direction_axes(n, 2)) axes.push_back(a);
  axes.push_back({-1.0, 1.0, 1});
  Slab domain(
      "log-polar support of the density", d, axes,
      [n, n2](std::span<const double> q, std::span<double> out) {
        double theta[4];
        direction(n, q.data() + 1, theta);
        const double r = std::exp(q[0]);
        for (int k = 0; k < n2; ++k) out[static_cast<std::size_t>(k)] = r * theta[k];
        out[static_cast<std::size_t>(n2)] = q[q.size() - 1];
      },
      [n](std::span<const double> q) { return std::exp(2.0 * n * q[0]) * direction_density(n); });
  Vec probe = Vec::Zero(d);
  probe(0) = 1.5;
  Slab test(
      "probe point", d, {{0.0, 1.0, 1}},
      [probe](std::span<const double>, std::span<double> out) {
        for (Eigen::Index k = 0; k < probe.size(); ++k) out[static_cast<std::size_t>(k)] = probe(k);
      },
      [](std::span<const double>) { return 1.0; });
  TimeSelector sel = TimeSelector::analytic("t(x) = |ubar x|", [n2](std::span<const double> x) {
    double sum = 0.0;
    for (int k = 0; k < n2; ++k) sum += x[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
    return std::sqrt(sum);
  });
  // Panels in the geodesic distance to the probe direction whose chord
  // radii t |w - w0| are the powers 2^{-k}, so that every truncation radius
  // is a panel edge.
  const double t = 1.5;
  const int k_max = static_cast<int>(std::ceil(-std::log2(cutoff))) + 1;
  std::vector<double> edges{0.0};
  for (int k = k_max; k >= 1; --k) edges.push_back(2.0 * std::asin(std::ldexp(1.0, -k) / (2.0 * t)));
  edges.push_back(kPi);
  SphereRule rule = graded_cap_rule(n, Vec::Unit(n2, 0), edges, 16);
  return build(Family::SteinDensity, s, 0.0, 0.0, 1.0, std::move(field), std::move(domain), std::move(test),
               std::move(sel), std::move(rule));
}

double predicted_exponent(Family f, int n, int m, double p, double q) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw DomainError("exponents need p, q >= 1");
  const double ip = std::isinf(p) ? 0.0 : 1.0 / p;
  const double iq = std::isinf(q) ? 0.0 : 1.0 / q;
  switch (f) {
    case Family::Ball: return (2.0 * n - 1.0) + m * iq - (2.0 * n + m) * ip;
    case Family::Scaling: return (2.0 * n + m) * iq - (m + 1.0) * ip;
    case Family::Knapp:
      if (m != 1) throw UnsupportedError("knapp exponent is defined for m = 1");
      return n * iq + n - (n + 2.0) * ip;
    case Family::MomentCurve:
      if (n != 1 || m != 1) throw UnsupportedError("moment-curve exponent is defined for n = m = 1");
      return 1.0 + 6.0 * iq - 6.0 * ip;
    case Family::SteinDensity: break;
  }
  throw UnsupportedError("stein density has no ratio exponent");
}

Rational predicted_exponent_exact(Family f, int n, int m, const Rational& ip, const Rational& iq) {
  const Rational N(n), M(m);
  switch (f) {
    case Family::Ball: return (2 * N - 1) + M * iq - (2 * N + M) * ip;
    case Family::Scaling: return (2 * N + M) * iq - (M + 1) * ip;
    case Family::Knapp:
      if (m != 1) throw UnsupportedError("knapp exponent is defined for m = 1");
      return N * iq + N - (N + 2) * ip;
    case Family::MomentCurve:
      if (n != 1 || m != 1) throw UnsupportedError("moment-curve exponent is defined for n = m = 1");
      return 1 + 6 * iq - 6 * ip;
    case Family::SteinDensity: break;
  }
  throw UnsupportedError("stein density has no ratio exponent");
}

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw DegenerateInputError("fit_exponent needs at least 3 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].first > 0.0)) throw DegenerateInputError("fit_exponent needs positive delta");
    if (!(points[i].second > 0.0)) throw DegenerateInputError("fit_exponent needs positive ratios");
    if (i > 0 && !(points[i].first < points[i - 1].first)) {
      throw DegenerateInputError("fit_exponent needs strictly decreasing delta");
    }
  }
  const double k = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [dl, r] : points) {
    sx += std::log(dl);
    sy += std::log(r);
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [dl, r] : points) {
    const double x = std::log(dl) - mx, y = std::log(r) - my;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return fit;
}

std::vector<double> test_region_values(const ExampleInstance& inst, const RatioOptions& opt) {
  const WeightedPoints pts = inst.test_region.lattice(opt.lattice_refinement);
  const SphereRule& rule = opt.rule ? *opt.rule : inst.rule;
  return parallel_map(pts.size(), [&](std::size_t i) {
    return maximal_value(inst.structure, inst.field, pts.point(i), inst.selector, rule);
  });
}

double field_norm(const ExampleInstance& inst, double p, double refinement) {
  std::vector<double> values, weights;
  inst.field_domain.for_each_point(refinement, [&](std::span<const double> point, double weight) {
    values.push_back(inst.field(point));
    weights.push_back(weight);
  });
  return lp_norm(values, weights, p);
}

double operator_ratio(const ExampleInstance& inst, double p, double q, const RatioOptions& opt) {
  const double denominator = field_norm(inst, p, opt.lattice_refinement);
  if (!(denominator > 0.0)) throw DegenerateInputError("field has zero L^p norm on its lattice");
  const WeightedPoints pts = inst.test_region.lattice(opt.lattice_refinement);
  const std::vector<double> values = test_region_values(inst, opt);
  return lp_norm(values, pts.weights, q) / denominator;
}

ExampleInstance translate_instance(const ExampleInstance& inst, const GroupPoint& z) {
  const MetivierStructure& s = inst.structure;
  s.check_point(z);
  const int n2 = 2 * s.n(), m = s.m(), d = s.d();
  // left(a, y) = a . y in flat coordinates.
  auto left = [s, n2, m, d](const GroupPoint& a, std::span<const double> y, std::span<double> out) {
    for (int k = 0; k < n2; ++k) out[static_cast<std::size_t>(k)] = a.ubar(k) + y[static_cast<std::size_t>(k)];
    for (int i = 0; i < m; ++i) {
      double form = 0.0;
      for (int k = 0; k < n2; ++k) {
        double jy = 0.0;
        for (int l = 0; l < n2; ++l) jy += s.J(i)(k, l) * y[static_cast<std::size_t>(l)];
        form += a.ubar(k) * jy;
      }
      out[static_cast<std::size_t>(n2 + i)] = a.bar(i) + y[static_cast<std::size_t>(n2 + i)] + form;
    }
    (void)d;
  };
  const GroupPoint zinv = group_inverse(s, z);
  // Support of f(z .) is z^{-1} times the old support, bounded by interval
  // arithmetic on the bilinear term.
  const Box& old = inst.field.support();
  Box box{Vec(d), Vec(d)};
  box.lo.head(n2) = old.lo.head(n2) - z.ubar;
  box.hi.head(n2) = old.hi.head(n2) - z.ubar;
  for (int i = 0; i < m; ++i) {
    const Vec a = s.J(i).transpose() * z.ubar;
    double lo = 0.0, hi = 0.0;
    for (int k = 0; k < n2; ++k) {
      lo += std::min(a(k) * old.lo(k), a(k) * old.hi(k));
      hi += std::max(a(k) * old.lo(k), a(k) * old.hi(k));
    }
    box.lo(n2 + i) = old.lo(n2 + i) - z.bar(i) - hi;
    box.hi(n2 + i) = old.hi(n2 + i) - z.bar(i) - lo;
  }
  const ScalarField f = inst.field;
  ScalarField field(inst.field.description() + " translated", box.inflated(kInflate),
                    [f, z, left, d](std::span<const double> w) {
                      std::vector<double> y(static_cast<std::size_t>(d));
                      left(z, w, y);
                      return f(std::span<const double>(y));
                    });
  auto move_slab = [&](const Slab& slab) {
    const Slab::Map inner = slab.map_function();
    return Slab(slab.label() + " translated", slab.dim(), slab.axes(),
                [inner, zinv, left, d](std::span<const double> q, std::span<double> out) {
                  std::vector<double> x(static_cast<std::size_t>(d));
                  inner(q, x);
                  left(zinv, x, out);
                },
                slab.density_function());
  };
  TimeSelector sel = inst.selector;
  if (!sel.is_grid()) {
    const TimeSelector old_sel = inst.selector;
    sel = TimeSelector::analytic(old_sel.label() + " translated", [old_sel, z, left, d](std::span<const double> x) {
      std::vector<double> y(static_cast<std::size_t>(d));
      left(z, x, y);
      return old_sel.time_for(y);
    });
  }
  return ExampleInstance{inst.family, s,     inst.delta, inst.scale, inst.constant, std::move(field),
                         move_slab(inst.field_domain), move_slab(inst.test_region), std::move(sel), inst.rule};
}

bool LadderResult::passes(double tolerance, double min_r_squared) const {
  return std::abs(fit.slope - predicted) <= tolerance && fit.r_squared >= min_r_squared;
}

LadderResult run_ladder(Family family, const MetivierStructure& s, double p, double q,
                        const std::vector<double>& scales, const ExampleOptions& opt) {
  LadderResult result{family, s.n(), s.m(), p, q, 1.0, 0.0, {}, {}};
  result.predicted = predicted_exponent(family, s.n(), s.m(), p, q);
  std::vector<std::pair<double, double>> points;
  for (double scale : scales) {
    ExampleInstance inst = [&] {
      switch (family) {
        case Family::Ball: return ball_example(s, scale, opt);
        case Family::Scaling: return scaling_example(s, scale, opt.time, opt);
        case Family::Knapp: return knapp_example(s, scale, opt);
        case Family::MomentCurve: return moment_example(scale, opt);
        case Family::SteinDensity: break;
      }
      throw UnsupportedError("stein density is a divergence diagnostic, not a ratio ladder");
    }();
    if (opt.time_grid > 0) inst.selector = TimeSelector::grid(opt.time_grid);
    result.constant = inst.constant;
    const double denominator = field_norm(inst, p, opt.lattice_refinement);
    if (!(denominator > 0.0)) throw DegenerateInputError("field has zero L^p norm on its lattice");
    RatioOptions ropt;
    ropt.lattice_refinement = opt.lattice_refinement;
    const WeightedPoints pts = inst.test_region.lattice(opt.lattice_refinement);
    const std::vector<double> values = test_region_values(inst, ropt);
    const double ratio = lp_norm(values, pts.weights, q) / denominator;
    const double test_min = values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
    result.rows.push_back({scale, inst.delta, ratio, test_min});
    points.emplace_back(inst.delta, ratio);
  }
  result.fit = fit_exponent(points);
  return result;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string ladder_csv(const LadderResult& r) {
  std::ostringstream out;
  out << "# schema=1\n";
  out << "# family=" << to_string(r.family) << " n=" << r.n << " m=" << r.m << " scale_constant="
      << format_number(r.constant) << " (delta = scale / scale_constant)\n";
  out << "family,n,m,p,q,delta,ratio,predicted_exponent,test_min\n";
  for (const LadderRow& row : r.rows) {
    out << to_string(r.family) << "," << r.n << "," << r.m << "," << format_number(r.p) << ","
        << format_number(r.q) << "," << format_number(row.delta) << "," << format_number(row.ratio) << ","
        << format_number(r.predicted) << "," << format_number(row.test_min) << "\n";
  }
  out << "# fit slope=" << format_number(r.fit.slope) << " intercept=" << format_number(r.fit.intercept)
      << " r_squared=" << format_number(r.fit.r_squared) << "\n";
  return out.str();
}

SteinDiagnostic stein_divergence(const MetivierStructure& s, double alpha, int j_min, int j_max,
                                 const ExampleOptions& opt) {
  if (j_min < 2 || j_max < j_min + 3) throw DomainError("stein diagnostic needs 2 <= j_min and j_max >= j_min + 3");
  SteinDiagnostic diag;
  diag.alpha = alpha;
  diag.n = s.n();
  diag.expected_growth = 1.0 - alpha;
  const double p2 = 2.0 * s.n() / (2.0 * s.n() - 1.0);
  const std::vector<int> js = [&] {
    std::vector<int> v;
    for (int j = j_min; j <= j_max; ++j) v.push_back(j);
    return v;
  }();
  std::vector<SteinRow> rows(js.size());
  const std::vector<double> values = parallel_map(js.size(), [&](std::size_t i) {
    const ExampleInstance inst = stein_example(s, alpha, std::ldexp(1.0, -js[i]), opt);
    const WeightedPoints probe = inst.test_region.lattice();
    return maximal_value(s, inst.field, probe.point(0), inst.selector, inst.rule);
  });
  for (std::size_t i = 0; i < js.size(); ++i) {
    const ExampleInstance inst = stein_example(s, alpha, std::ldexp(1.0, -js[i]), opt);
    rows[i].j = js[i];
    rows[i].cutoff = std::ldexp(1.0, -js[i]);
    rows[i].value = values[i];
    rows[i].increment = i == 0 ? 0.0 : values[i] - values[i - 1];
    rows[i].norm_pp = std::pow(field_norm(inst, p2), p2);
  }
  diag.monotone = true;
  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].value > rows[i - 1].value)) diag.monotone = false;
    // The new panel covers log(1/r) in [(j-1) log 2, j log 2].
    const double mid_log = (rows[i].j - 0.5) * std::numbers::ln2;
    if (rows[i].increment > 0.0) points.emplace_back(1.0 / mid_log, rows[i].increment);
  }
  diag.rows = rows;
  if (points.size() >= 3 && diag.monotone) {
    diag.increment_fit = fit_exponent(points);
    diag.growth_exponent = 1.0 - diag.increment_fit.slope;
  }
  diag.norm_tail = rows.size() >= 2 ? rows.back().norm_pp - rows[rows.size() - 2].norm_pp : 0.0;
  return diag;
}

std::string stein_csv(const SteinDiagnostic& diag) {
  std::ostringstream out;
  out << "# schema=1\n";
  out << "# stein density n=" << diag.n << " alpha=" << format_number(diag.alpha) << "\n";
  out << "j,cutoff,value,increment,norm_pp\n";
  for (const SteinRow& r : diag.rows) {
    out << r.j << "," << format_number(r.cutoff) << "," << format_number(r.value) << ","
        << format_number(r.increment) << "," << format_number(r.norm_pp) << "\n";
  }
  out << "# monotone=" << (diag.monotone ? "yes" : "no") << " growth_exponent=" << format_number(diag.growth_exponent)
      << " expected=" << format_number(diag.expected_growth) << " increment_fit_r_squared="
      << format_number(diag.increment_fit.r_squared) << " norm_tail=" << format_number(diag.norm_tail) << "\n";
  return out.str();
}

}  // namespace hsm
