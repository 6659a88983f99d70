#include "hsm/sphere.hpp"

#include "hsm/errors.hpp"
#include "hsm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace hsm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using IndexRange = std::pair<int, int>;  // inclusive
using Interval = std::pair<double, double>;

void uniform_angles(int count, std::vector<double>& c, std::vector<double>& s) {
  c.resize(static_cast<std::size_t>(count));
  s.resize(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double a = kTwoPi * k / count;
    c[static_cast<std::size_t>(k)] = std::cos(a);
    s[static_cast<std::size_t>(k)] = std::sin(a);
  }
}

// Splits [lo, hi] (length at most 2 pi) into pieces of [0, 2 pi).
void add_wrapped(std::vector<Interval>& out, double lo, double hi) {
  if (hi - lo >= kTwoPi) {
    out.emplace_back(0.0, kTwoPi);
    return;
  }
  const double shift = kTwoPi * std::floor(lo / kTwoPi);
  lo -= shift;
  hi -= shift;
  if (hi <= kTwoPi) {
    out.emplace_back(lo, hi);
  } else {
    out.emplace_back(lo, kTwoPi);
    out.emplace_back(0.0, hi - kTwoPi);
  }
}

// Angles a with cos(a - phase) in [lo, hi] (already divided by the radius).
bool cosine_band(double lo, double hi, double phase, std::vector<Interval>& out) {
  if (lo > 1.0 || hi < -1.0) return false;
  const double A = std::acos(std::min(hi, 1.0));
  const double B = std::acos(std::max(lo, -1.0));
  add_wrapped(out, phase + A, phase + B);
  add_wrapped(out, phase - B, phase - A);
  return true;
}

void inflate(double& lo, double& hi) {
  lo -= 1e-12 * (1.0 + std::abs(lo));
  hi += 1e-12 * (1.0 + std::abs(hi));
}

// Sorted disjoint index ranges of the uniform angles 2 pi k / K for which
// (rho cos a, rho sin a) can lie in [c_lo, c_hi] x [s_lo, s_hi]. One index
// of margin on each side absorbs rounding in the interval ends.
std::vector<IndexRange> feasible_ranges(double rho, double c_lo, double c_hi, double s_lo,
                                        double s_hi, int K) {
  std::vector<IndexRange> ranges;
  inflate(c_lo, c_hi);
  inflate(s_lo, s_hi);
  if (rho < 1e-150) {
    if (c_lo <= 0.0 && 0.0 <= c_hi && s_lo <= 0.0 && 0.0 <= s_hi) ranges.emplace_back(0, K - 1);
    return ranges;
  }
  std::vector<Interval> cos_set, sin_set;
  if (!cosine_band(c_lo / rho, c_hi / rho, 0.0, cos_set)) return ranges;
  if (!cosine_band(s_lo / rho, s_hi / rho, 0.5 * std::numbers::pi, sin_set)) return ranges;
  std::vector<IndexRange> raw;
  for (const Interval& a : cos_set) {
    for (const Interval& b : sin_set) {
      const double lo = std::max(a.first, b.first);
      const double hi = std::min(a.second, b.second);
      if (lo > hi) continue;
      int k0 = static_cast<int>(std::ceil(lo * K / kTwoPi)) - 1;
      int k1 = static_cast<int>(std::floor(hi * K / kTwoPi)) + 1;
      if (k1 - k0 + 1 >= K) {
        raw.assign(1, {0, K - 1});
        break;
      }
      if (k0 < 0) {
        raw.emplace_back(K + k0, K - 1);
        k0 = 0;
      }
      if (k1 >= K) {
        raw.emplace_back(0, k1 - K);
        k1 = K - 1;
      }
      raw.emplace_back(k0, k1);
    }
    if (!raw.empty() && raw.front() == IndexRange{0, K - 1} && raw.size() == 1) break;
  }
  std::sort(raw.begin(), raw.end());
  for (const IndexRange& r : raw) {
    if (!ranges.empty() && r.first <= ranges.back().second + 1) {
      ranges.back().second = std::max(ranges.back().second, r.second);
    } else {
      ranges.push_back(r);
    }
  }
  return ranges;
}

std::vector<IndexRange> full_range(int K) { return {IndexRange{0, K - 1}}; }

// Precomputed affine data of the averaging map for fixed (x, t):
// y_k = x_k - t w_k for k < 2n and y_{2n+i} = xbar_i - C_i . w.
struct AveragingMap {
  int n2 = 0;
  int m = 0;
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> C;  // m rows of length 2n
};

AveragingMap make_map(const MetivierStructure& s, double t, std::span<const double> x) {
  AveragingMap a;
  a.n2 = 2 * s.n();
  a.m = s.m();
  a.t = t;
  a.x.assign(x.begin(), x.end());
  a.C.assign(static_cast<std::size_t>(a.m * a.n2), 0.0);
  Vec ux(a.n2);
  for (int k = 0; k < a.n2; ++k) ux(k) = x[static_cast<std::size_t>(k)];
  for (int i = 0; i < a.m; ++i) {
    const Vec row = t * s.J(i).transpose() * ux + (t * t) * s.Lambda().row(i).transpose();
    for (int k = 0; k < a.n2; ++k) a.C[static_cast<std::size_t>(i * a.n2 + k)] = row(k);
  }
  return a;
}

inline void apply_map(const AveragingMap& a, const double* w, double* y) {
  for (int k = 0; k < a.n2; ++k) y[k] = a.x[static_cast<std::size_t>(k)] - a.t * w[k];
  for (int i = 0; i < a.m; ++i) {
    const double* c = &a.C[static_cast<std::size_t>(i * a.n2)];
    double dot = 0.0;
    for (int k = 0; k < a.n2; ++k) dot += c[k] * w[k];
    y[a.n2 + i] = a.x[static_cast<std::size_t>(a.n2 + i)] - dot;
  }
}

}  // namespace

bool Box::contains(std::span<const double> p) const {
  for (Eigen::Index k = 0; k < lo.size(); ++k) {
    const double v = p[static_cast<std::size_t>(k)];
    if (!(v >= lo(k) && v <= hi(k))) return false;
  }
  return true;
}

Box Box::inflated(double rel) const {
  Box b = *this;
  for (Eigen::Index k = 0; k < lo.size(); ++k) {
    b.lo(k) -= rel * (1.0 + std::abs(lo(k)));
    b.hi(k) += rel * (1.0 + std::abs(hi(k)));
  }
  return b;
}

SphereRule SphereRule::circle(int count) {
  if (count < 4) throw DomainError("circle rule needs at least 4 nodes");
  SphereRule r;
  r.n_ = 1;
  r.layout_ = Layout::Circle;
  r.label_ = "circle(" + std::to_string(count) + ")";
  uniform_angles(count, r.cos1_, r.sin1_);
  return r;
}

SphereRule SphereRule::hopf(int latitude_count, int angle1_count, int angle2_count) {
  if (latitude_count < 2 || angle1_count < 4 || angle2_count < 4) {
    throw DomainError("Hopf rule needs at least 2 latitudes and 4 angles per factor");
  }
  SphereRule r;
  r.n_ = 2;
  r.layout_ = Layout::Hopf;
  r.label_ = "hopf(" + std::to_string(latitude_count) + "," + std::to_string(angle1_count) + "," +
             std::to_string(angle2_count) + ")";
  const GaussLegendre gl = gauss_legendre(latitude_count);
  for (std::size_t a = 0; a < gl.nodes.size(); ++a) {
    const double z = gl.nodes[a];
    r.lat_cos_.push_back(std::sqrt(0.5 * (1.0 + z)));
    r.lat_sin_.push_back(std::sqrt(0.5 * (1.0 - z)));
    r.lat_weight_.push_back(0.5 * gl.weights[a] / (static_cast<double>(angle1_count) * angle2_count));
  }
  uniform_angles(angle1_count, r.cos1_, r.sin1_);
  uniform_angles(angle2_count, r.cos2_, r.sin2_);
  return r;
}

SphereRule SphereRule::scattered(int n, Mat nodes, std::vector<double> weights, bool certified,
                                 std::string label) {
  if (n < 1) throw DomainError("sphere dimension must be positive");
  if (nodes.cols() != 2 * n || static_cast<std::size_t>(nodes.rows()) != weights.size() ||
      weights.empty()) {
    throw StructuralError("scattered rule needs one 2n-vector per weight");
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw DomainError("quadrature weights must be positive");
  }
  SphereRule r;
  r.n_ = n;
  r.layout_ = Layout::Scattered;
  r.certified_ = certified;
  r.label_ = std::move(label);
  r.nodes_ = std::move(nodes);
  r.weights_ = std::move(weights);
  return r;
}

std::size_t SphereRule::size() const {
  switch (layout_) {
    case Layout::Circle: return cos1_.size();
    case Layout::Hopf: return lat_cos_.size() * cos1_.size() * cos2_.size();
    case Layout::Scattered: return weights_.size();
  }
  return 0;
}

Vec SphereRule::node(std::size_t i) const {
  Vec w(2 * n_);
  switch (layout_) {
    case Layout::Circle:
      w << cos1_[i], sin1_[i];
      break;
    case Layout::Hopf: {
      const std::size_t K1 = cos1_.size(), K2 = cos2_.size();
      const std::size_t a = i / (K1 * K2), b = (i / K2) % K1, c = i % K2;
      w << lat_cos_[a] * cos1_[b], lat_cos_[a] * sin1_[b], lat_sin_[a] * cos2_[c], lat_sin_[a] * sin2_[c];
      break;
    }
    case Layout::Scattered:
      w = nodes_.row(static_cast<Eigen::Index>(i)).transpose();
      break;
  }
  return w;
}

double SphereRule::weight(std::size_t i) const {
  switch (layout_) {
    case Layout::Circle: return 1.0 / static_cast<double>(cos1_.size());
    case Layout::Hopf: return lat_weight_[i / (cos1_.size() * cos2_.size())];
    case Layout::Scattered: return weights_[i];
  }
  return 0.0;
}

double SphereRule::weight_sum() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < size(); ++i) sum += weight(i);
  return sum;
}

SphereRule sphere_rule(int n, int resolution, std::uint64_t seed) {
  if (n < 1) throw DomainError("sphere_rule needs n >= 1");
  if (resolution < 4) throw DomainError("sphere_rule resolution must be at least 4");
  if (n == 1) return SphereRule::circle(resolution);
  if (n == 2) return SphereRule::hopf(std::max(2, resolution / 2), resolution, resolution);
  const int count = resolution * resolution;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat nodes(count, 2 * n);
  for (int i = 0; i < count; ++i) {
    Vec g(2 * n);
    do {
      for (int k = 0; k < 2 * n; ++k) g(k) = normal(rng);
    } while (g.norm() < 1e-8);
    nodes.row(i) = (g / g.norm()).transpose();
  }
  return SphereRule::scattered(n, std::move(nodes),
                               std::vector<double>(static_cast<std::size_t>(count), 1.0 / count), false,
                               "monte-carlo(" + std::to_string(count) + ")");
}

SphereRule graded_cap_rule(int n, const Vec& center, const std::vector<double>& edges, int order) {
  if (n != 1 && n != 2) throw UnsupportedError("graded cap rule supports n = 1 and n = 2");
  if (center.size() != 2 * n || std::abs(center.norm() - 1.0) > 1e-12) {
    throw StructuralError("cap center must be a unit vector in R^{2n}");
  }
  if (edges.size() < 2 || edges.front() != 0.0 || std::abs(edges.back() - std::numbers::pi) > 1e-15) {
    throw DomainError("panel edges must run from 0 to pi");
  }
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (!(edges[k] > edges[k - 1])) throw DomainError("panel edges must increase");
  }
  const GaussLegendre gl = gauss_legendre(order);
  // Orthonormal complement of the center.
  Mat frame = Mat::Identity(2 * n, 2 * n);
  frame.col(0) = center;
  Eigen::HouseholderQR<Mat> qr(frame);
  Mat Q = qr.householderQ();
  if (Q.col(0).dot(center) < 0) Q.col(0) *= -1.0;
  std::vector<Vec> directions;
  std::vector<double> direction_weights;
  if (n == 1) {
    directions = {Q.col(1), -Q.col(1)};
    direction_weights = {0.5, 0.5};
  } else {
    // Product rule on the unit sphere of the 3-dimensional complement.
    const int nz = 8, nphi = 16;
    const GaussLegendre glz = gauss_legendre(nz);
    for (int a = 0; a < nz; ++a) {
      const double z = glz.nodes[static_cast<std::size_t>(a)];
      const double r = std::sqrt(1.0 - z * z);
      for (int b = 0; b < nphi; ++b) {
        const double phi = kTwoPi * b / nphi;
        directions.push_back(z * Q.col(1) + r * std::cos(phi) * Q.col(2) + r * std::sin(phi) * Q.col(3));
        direction_weights.push_back(0.5 * glz.weights[static_cast<std::size_t>(a)] / nphi);
      }
    }
  }
  std::vector<Vec> nodes;
  std::vector<double> weights;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
      const double rho = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[j];
      const double radial = 0.5 * (b - a) * gl.weights[j] * (n == 1 ? 1.0 : std::sin(rho) * std::sin(rho));
      for (std::size_t k = 0; k < directions.size(); ++k) {
        nodes.push_back(std::cos(rho) * center + std::sin(rho) * directions[k]);
        weights.push_back(radial * direction_weights[k]);
      }
    }
  }
  double total = 0.0;
  for (double w : weights) total += w;
  Mat node_mat(static_cast<Eigen::Index>(nodes.size()), 2 * n);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    node_mat.row(static_cast<Eigen::Index>(i)) = (nodes[i] / nodes[i].norm()).transpose();
    weights[i] /= total;
  }
  return SphereRule::scattered(n, std::move(node_mat), std::move(weights), true,
                               "graded-cap(" + std::to_string(edges.size() - 1) + " panels)");
}

ScalarField::ScalarField(std::string description, Box support, Evaluator evaluator)
    : description_(std::move(description)), support_(std::move(support)), evaluator_(std::move(evaluator)) {
  if (support_.lo.size() != support_.hi.size() || support_.lo.size() == 0) {
    throw StructuralError("support box bounds must share a positive dimension");
  }
}

double ScalarField::operator()(const GroupPoint& x) const {
  const std::vector<double> p = flatten(x);
  if (static_cast<int>(p.size()) != dim()) throw StructuralError("field and point dimensions differ");
  return (*this)(std::span<const double>(p));
}

ScalarField ScalarField::scaled(double c) const {
  Evaluator inner = evaluator_;
  return ScalarField(description_ + " scaled", support_, [inner, c](std::span<const double> p) {
    return c * inner(p);
  });
}

TimeSelector TimeSelector::grid(int count) {
  if (count < 2) throw DomainError("time grid needs at least 2 points");
  TimeSelector sel;
  sel.grid_count_ = count;
  sel.label_ = "grid(" + std::to_string(count) + ")";
  return sel;
}

TimeSelector TimeSelector::analytic(std::string label, Map map) {
  TimeSelector sel;
  sel.label_ = std::move(label);
  sel.map_ = std::move(map);
  return sel;
}

TimeSelector TimeSelector::fixed(double t) {
  if (!(t >= 1.0 && t <= 2.0)) throw DomainError("fixed time must lie in [1, 2]");
  return analytic("fixed(" + std::to_string(t) + ")", [t](std::span<const double>) { return t; });
}

double TimeSelector::grid_time(int k) const {
  if (!is_grid() || k < 0 || k >= grid_count_) throw DomainError("grid index out of range");
  return 1.0 + static_cast<double>(k) / (grid_count_ - 1);
}

double TimeSelector::time_for(std::span<const double> x) const {
  if (is_grid()) throw DomainError("grid selector has no single time");
  return std::clamp(map_(x), 1.0, 2.0);
}

std::vector<double> flatten(const GroupPoint& x) {
  std::vector<double> p(static_cast<std::size_t>(x.ubar.size() + x.bar.size()));
  for (Eigen::Index k = 0; k < x.ubar.size(); ++k) p[static_cast<std::size_t>(k)] = x.ubar(k);
  for (Eigen::Index k = 0; k < x.bar.size(); ++k) {
    p[static_cast<std::size_t>(x.ubar.size() + k)] = x.bar(k);
  }
  return p;
}

double spherical_average(const MetivierStructure& s, const ScalarField& f, double t,
                         std::span<const double> x, const SphereRule& rule, Pruning pruning) {
  const int d = s.d();
  if (static_cast<int>(x.size()) != d || f.dim() != d || rule.n() != s.n()) {
    throw StructuralError("spherical_average: structure, field, point and rule dimensions differ");
  }
  if (!(t > 0.0)) throw DomainError("spherical_average needs t > 0");
  const AveragingMap map = make_map(s, t, x);
  const Box& box = f.support();
  // Horizontal constraint lo <= x - t w <= hi, i.e. w in [(x - hi)/t, (x - lo)/t].
  auto wlo = [&](int k) { return (x[static_cast<std::size_t>(k)] - box.hi(k)) / t; };
  auto whi = [&](int k) { return (x[static_cast<std::size_t>(k)] - box.lo(k)) / t; };
  const bool prune = pruning == Pruning::Enabled;
  double w[64];
  double y[128];
  if (2 * s.n() > 64 || d > 128) throw UnsupportedError("dimension too large for the averaging kernel");
  double acc = 0.0;
  switch (rule.layout()) {
    case SphereRule::Layout::Circle: {
      const int K = static_cast<int>(rule.cos1().size());
      const double weight = 1.0 / K;
      const auto ranges = prune ? feasible_ranges(1.0, wlo(0), whi(0), wlo(1), whi(1), K) : full_range(K);
      for (const IndexRange& r : ranges) {
        for (int k = r.first; k <= r.second; ++k) {
          w[0] = rule.cos1()[static_cast<std::size_t>(k)];
          w[1] = rule.sin1()[static_cast<std::size_t>(k)];
          apply_map(map, w, y);
          acc += weight * f(std::span<const double>(y, static_cast<std::size_t>(d)));
        }
      }
      break;
    }
    case SphereRule::Layout::Hopf: {
      const int K1 = static_cast<int>(rule.cos1().size());
      const int K2 = static_cast<int>(rule.cos2().size());
      for (std::size_t a = 0; a < rule.lat_cos().size(); ++a) {
        const double r1 = rule.lat_cos()[a], r2 = rule.lat_sin()[a];
        const auto ranges1 = prune ? feasible_ranges(r1, wlo(0), whi(0), wlo(1), whi(1), K1) : full_range(K1);
        if (ranges1.empty()) continue;
        const auto ranges2 = prune ? feasible_ranges(r2, wlo(2), whi(2), wlo(3), whi(3), K2) : full_range(K2);
        if (ranges2.empty()) continue;
        const double weight = rule.lat_weight()[a];
        for (const IndexRange& rb : ranges1) {
          for (int b = rb.first; b <= rb.second; ++b) {
            w[0] = r1 * rule.cos1()[static_cast<std::size_t>(b)];
            w[1] = r1 * rule.sin1()[static_cast<std::size_t>(b)];
            for (const IndexRange& rc : ranges2) {
              for (int c = rc.first; c <= rc.second; ++c) {
                w[2] = r2 * rule.cos2()[static_cast<std::size_t>(c)];
                w[3] = r2 * rule.sin2()[static_cast<std::size_t>(c)];
                apply_map(map, w, y);
                acc += weight * f(std::span<const double>(y, static_cast<std::size_t>(d)));
              }
            }
          }
        }
      }
      break;
    }
    case SphereRule::Layout::Scattered: {
      const Mat& nodes = rule.scattered_nodes();
      for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
        for (int k = 0; k < 2 * s.n(); ++k) w[k] = nodes(i, k);
        apply_map(map, w, y);
        acc += rule.scattered_weights()[static_cast<std::size_t>(i)] *
               f(std::span<const double>(y, static_cast<std::size_t>(d)));
      }
      break;
    }
  }
  return acc;
}

double spherical_average(const MetivierStructure& s, const ScalarField& f, double t,
                         const GroupPoint& x, const SphereRule& rule, Pruning pruning) {
  s.check_point(x);
  const std::vector<double> p = flatten(x);
  return spherical_average(s, f, t, std::span<const double>(p), rule, pruning);
}

double maximal_value(const MetivierStructure& s, const ScalarField& f, std::span<const double> x,
                     const TimeSelector& sel, const SphereRule& rule) {
  if (!sel.is_grid()) return std::abs(spherical_average(s, f, sel.time_for(x), x, rule));
  double best = 0.0;
  for (int k = 0; k < sel.count(); ++k) {
    best = std::max(best, std::abs(spherical_average(s, f, sel.grid_time(k), x, rule)));
  }
  return best;
}

double maximal_value(const MetivierStructure& s, const ScalarField& f, const GroupPoint& x,
                     const TimeSelector& sel, const SphereRule& rule) {
  s.check_point(x);
  const std::vector<double> p = flatten(x);
  return maximal_value(s, f, std::span<const double>(p), sel, rule);
}

}  // namespace hsm
