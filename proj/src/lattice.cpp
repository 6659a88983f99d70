#include "hsm/lattice.hpp"

#include "hsm/errors.hpp"

#include <cmath>
#include <limits>

namespace hsm {

Slab::Slab(std::string label, int dim, std::vector<LatticeAxis> axes, Map map, Density density)
    : label_(std::move(label)), dim_(dim), axes_(std::move(axes)), map_(std::move(map)), density_(std::move(density)) {
  if (dim_ < 1 || axes_.empty()) throw StructuralError("slab needs a positive dimension and at least one axis");
  for (const LatticeAxis& a : axes_) {
    if (!(a.hi > a.lo)) throw DomainError("slab axis [" + std::to_string(a.lo) + ", " + std::to_string(a.hi) + "] is empty");
    if (a.count < 1) throw DomainError("slab axis needs a positive sample count");
  }
}

Slab Slab::box(const Box& b, const std::vector<int>& counts) {
  if (static_cast<int>(counts.size()) != b.dim()) throw StructuralError("one count per box axis is required");
  std::vector<LatticeAxis> axes;
  for (int k = 0; k < b.dim(); ++k) axes.push_back({b.lo(k), b.hi(k), counts[static_cast<std::size_t>(k)]});
  return Slab(
      "box", b.dim(), std::move(axes),
      [](std::span<const double> params, std::span<double> point) {
        for (std::size_t k = 0; k < params.size(); ++k) point[k] = params[k];
      },
      [](std::span<const double>) { return 1.0; });
}

WeightedPoints Slab::lattice(double refinement) const {
  if (!(refinement > 0.0)) throw DomainError("lattice refinement must be positive");
  WeightedPoints out;
  out.dim = dim_;
  for_each_point(refinement, [&](std::span<const double> point, double weight) {
    out.coords.insert(out.coords.end(), point.begin(), point.end());
    out.weights.push_back(weight);
  });
  return out;
}

double Slab::measure(double refinement) const {
  if (!(refinement > 0.0)) throw DomainError("lattice refinement must be positive");
  double sum = 0.0;
  for_each_point(refinement, [&](std::span<const double>, double weight) { sum += weight; });
  return sum;
}

double lp_norm(std::span<const double> values, std::span<const double> weights, double p) {
  if (values.size() != weights.size()) throw StructuralError("lp_norm needs one weight per value");
  if (!(p >= 1.0)) throw DomainError("lp_norm needs p >= 1");
  if (std::isinf(p)) {
    double best = 0.0;
    for (double v : values) best = std::max(best, std::abs(v));
    return best;
  }
  // Factor out the largest magnitude so that scaling by a power of two is
  // reproduced exactly and large exponents do not overflow.
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += weights[i] * std::pow(std::abs(values[i]) / peak, p);
  return peak * std::pow(sum, 1.0 / p);
}

double lp_norm(const std::function<double(std::span<const double>)>& f, double p, const Box& box,
               const std::vector<int>& counts) {
  for (int k = 0; k < box.dim(); ++k) {
    if (!(box.hi(k) > box.lo(k))) throw DomainError("lp_norm over an empty box");
  }
  const WeightedPoints pts = Slab::box(box, counts).lattice();
  std::vector<double> values(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) values[i] = f(pts.point(i));
  return lp_norm(values, pts.weights, p);
}

}  // namespace hsm
