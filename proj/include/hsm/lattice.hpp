#pragma once

#include "hsm/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hsm {

struct LatticeAxis {
  double lo = 0.0;
  double hi = 0.0;
  int count = 1;
};

// Midpoint lattice points in R^d with quadrature weights.
struct WeightedPoints {
  int dim = 0;
  std::vector<double> coords;  // row-major, dim per point
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

// A region described by a parameter box, a map into R^d and the Jacobian
// density of that map. A density of 0 masks parameters outside the region,
// which lets balls be sampled from their bounding cube.
class Slab {
 public:
  using Map = std::function<void(std::span<const double> params, std::span<double> point)>;
  using Density = std::function<double(std::span<const double> params)>;

  Slab(std::string label, int dim, std::vector<LatticeAxis> axes, Map map, Density density);

  // The identity parametrization of a box.
  static Slab box(const Box& b, const std::vector<int>& counts);

  // Midpoint rule with every axis count multiplied by refinement.
  WeightedPoints lattice(double refinement = 1.0) const;
  double measure(double refinement = 1.0) const;

  int dim() const { return dim_; }
  const std::string& label() const { return label_; }
  const std::vector<LatticeAxis>& axes() const { return axes_; }
  void map(std::span<const double> params, std::span<double> point) const { map_(params, point); }
  double density(std::span<const double> params) const { return density_(params); }
  const Map& map_function() const { return map_; }
  const Density& density_function() const { return density_; }

  // Visits every lattice point with positive weight in lattice order.
  template <class Fn>
  void for_each_point(double refinement, Fn&& fn) const;

 private:
  std::string label_;
  int dim_ = 0;
  std::vector<LatticeAxis> axes_;
  Map map_;
  Density density_;
};

template <class Fn>
void Slab::for_each_point(double refinement, Fn&& fn) const {
  const std::size_t naxes = axes_.size();
  std::vector<int> counts(naxes);
  std::vector<double> step(naxes);
  double cell = 1.0;
  std::size_t total = 1;
  for (std::size_t a = 0; a < naxes; ++a) {
    counts[a] = std::max(1, static_cast<int>(std::lround(axes_[a].count * refinement)));
    step[a] = (axes_[a].hi - axes_[a].lo) / counts[a];
    cell *= step[a];
    total *= static_cast<std::size_t>(counts[a]);
  }
  std::vector<int> idx(naxes, 0);
  std::vector<double> params(naxes);
  std::vector<double> point(static_cast<std::size_t>(dim_));
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (std::size_t a = 0; a < naxes; ++a) params[a] = axes_[a].lo + (idx[a] + 0.5) * step[a];
    const double density = density_(params);
    if (density > 0.0) {
      map_(params, point);
      fn(std::span<const double>(point), density * cell);
    }
    for (std::size_t a = naxes; a-- > 0;) {
      if (++idx[a] < counts[a]) break;
      idx[a] = 0;
    }
  }
}

// (sum_i w_i |v_i|^p)^(1/p), or max |v_i| for p = infinity.
double lp_norm(std::span<const double> values, std::span<const double> weights, double p);

// Riemann-sum L^p norm of f on a box with the given per-axis counts.
double lp_norm(const std::function<double(std::span<const double>)>& f, double p, const Box& box,
               const std::vector<int>& counts);

}  // namespace hsm
