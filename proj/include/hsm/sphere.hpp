#pragma once

#include "hsm/metivier.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hsm {

// Axis-aligned box in R^d.
struct Box {
  Vec lo;
  Vec hi;
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(std::span<const double> p) const;
  // Grows every side by rel * (1 + |bound|).
  Box inflated(double rel) const;
};

// Positive-weight quadrature for the normalized measure on S^{2n-1}. The
// node layout is kept so that the averaging loop can skip whole index
// ranges that cannot reach the support of the integrand.
class SphereRule {
 public:
  enum class Layout { Circle, Hopf, Scattered };

  // Uniform angles 2 pi k / count on S^1.
  static SphereRule circle(int count);
  // S^3 in Hopf coordinates: Gauss-Legendre in cos(2 eta), uniform in the
  // two angles.
  static SphereRule hopf(int latitude_count, int angle1_count, int angle2_count);
  // Explicit nodes (row i is node i) with positive weights.
  static SphereRule scattered(int n, Mat nodes, std::vector<double> weights, bool certified,
                              std::string label);

  int n() const { return n_; }
  Layout layout() const { return layout_; }
  std::size_t size() const;
  bool certified() const { return certified_; }
  const std::string& label() const { return label_; }

  Vec node(std::size_t i) const;
  double weight(std::size_t i) const;
  double weight_sum() const;

  // Layout data used by the averaging loop.
  const std::vector<double>& lat_cos() const { return lat_cos_; }
  const std::vector<double>& lat_sin() const { return lat_sin_; }
  const std::vector<double>& lat_weight() const { return lat_weight_; }
  const std::vector<double>& cos1() const { return cos1_; }
  const std::vector<double>& sin1() const { return sin1_; }
  const std::vector<double>& cos2() const { return cos2_; }
  const std::vector<double>& sin2() const { return sin2_; }
  const Mat& scattered_nodes() const { return nodes_; }
  const std::vector<double>& scattered_weights() const { return weights_; }

 private:
  int n_ = 1;
  Layout layout_ = Layout::Circle;
  bool certified_ = true;
  std::string label_;
  std::vector<double> lat_cos_, lat_sin_, lat_weight_;
  std::vector<double> cos1_, sin1_, cos2_, sin2_;
  Mat nodes_;
  std::vector<double> weights_;
};

// Circle rule for n = 1, Hopf product rule for n = 2, seeded Monte Carlo
// (uncertified) for n >= 3. Throws DomainError for resolution < 4.
SphereRule sphere_rule(int n, int resolution, std::uint64_t seed = 1);

// Rule concentrated around a center direction: the geodesic distance to the
// center is integrated panel by panel with Gauss-Legendre of the given
// order. Edges must increase from 0 to pi. Supports n = 1 and n = 2.
SphereRule graded_cap_rule(int n, const Vec& center, const std::vector<double>& panel_edges,
                           int order);

// Pointwise-evaluable function on R^d that vanishes outside its support box.
class ScalarField {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;

  ScalarField(std::string description, Box support, Evaluator evaluator);

  double operator()(std::span<const double> p) const {
    return support_.contains(p) ? evaluator_(p) : 0.0;
  }
  double operator()(const GroupPoint& x) const;

  const Box& support() const { return support_; }
  const std::string& description() const { return description_; }
  int dim() const { return support_.dim(); }

  ScalarField scaled(double c) const;

 private:
  std::string description_;
  Box support_;
  Evaluator evaluator_;
};

// Choice of t in [1, 2] for the maximal function: a uniform grid or a
// point-dependent analytic selector (clamped to [1, 2]).
class TimeSelector {
 public:
  using Map = std::function<double(std::span<const double>)>;

  static TimeSelector grid(int count);
  static TimeSelector analytic(std::string label, Map map);
  static TimeSelector fixed(double t);

  bool is_grid() const { return grid_count_ > 0; }
  int count() const { return grid_count_; }
  double grid_time(int k) const;
  double time_for(std::span<const double> x) const;
  const std::string& label() const { return label_; }

 private:
  int grid_count_ = 0;
  std::string label_;
  Map map_;
};

enum class Pruning { Enabled, Disabled };

// sum_j w_j f(ubar x - t w_j, bar x - t^2 Lambda w_j - t (ubar x^T J_i w_j)_i)
// with x given in flat coordinates (ubar, bar).
double spherical_average(const MetivierStructure& s, const ScalarField& f, double t,
                         std::span<const double> x, const SphereRule& rule,
                         Pruning pruning = Pruning::Enabled);
double spherical_average(const MetivierStructure& s, const ScalarField& f, double t,
                         const GroupPoint& x, const SphereRule& rule,
                         Pruning pruning = Pruning::Enabled);

double maximal_value(const MetivierStructure& s, const ScalarField& f, std::span<const double> x,
                     const TimeSelector& sel, const SphereRule& rule);
double maximal_value(const MetivierStructure& s, const ScalarField& f, const GroupPoint& x,
                     const TimeSelector& sel, const SphereRule& rule);

std::vector<double> flatten(const GroupPoint& x);

}  // namespace hsm
