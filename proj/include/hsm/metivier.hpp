#pragma once

#include "hsm/linalg.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace hsm {

// Exponential coordinates x = (ubar x, bar x) with ubar x in R^{2n} and
// bar x in R^m.
struct GroupPoint {
  Vec ubar;
  Vec bar;
};

// The datum (n, m, J_1..J_m, Lambda) of a two-step group with skew
// commutator forms J_i on R^{2n} and tilt matrix Lambda (m x 2n).
class MetivierStructure {
 public:
  // Throws StructuralError unless every J_i is 2n x 2n and exactly skew and
  // Lambda is m x 2n.
  MetivierStructure(std::vector<Mat> J, Mat Lambda);

  int n() const { return n_; }
  int m() const { return static_cast<int>(J_.size()); }
  int d() const { return 2 * n_ + m(); }

  const Mat& J(int i) const { return J_.at(static_cast<std::size_t>(i)); }
  const std::vector<Mat>& Js() const { return J_; }
  const Mat& Lambda() const { return Lambda_; }

  // J^theta = sum theta_i J_i and Lambda^theta = sum theta_i Lambda_i.
  Mat J_theta(const Vec& theta) const;
  Vec Lambda_theta(const Vec& theta) const;

  MetivierStructure with_lambda(Mat Lambda) const;

  void check_point(const GroupPoint& x) const;

 private:
  int n_ = 0;
  std::vector<Mat> J_;
  Mat Lambda_;
};

GroupPoint identity_point(const MetivierStructure& s);
GroupPoint group_multiply(const MetivierStructure& s, const GroupPoint& x, const GroupPoint& y);
GroupPoint group_inverse(const MetivierStructure& s, const GroupPoint& x);
GroupPoint dilate(const MetivierStructure& s, double t, const GroupPoint& x);

// H^n with ubar x^T J ubar y = 1/2 sum_j (x_{n+j} y_j - x_j y_{n+j}).
MetivierStructure standard_heisenberg(int n);
// The same group with J rescaled so that J^2 = -I.
MetivierStructure unit_heisenberg(int n);
// Block-diagonal left multiplication by the quaternion units i, j, k on
// R^{4 blocks}; m must lie in 1..3.
MetivierStructure quaternionic_htype(int blocks, int m);

int radon_hurwitz(int k);

// Quasi-uniform directions on S^{m-1}; resolution 0 selects the default
// density for m.
std::vector<Vec> theta_grid(int m, int resolution = 0, std::uint64_t seed = 1);

struct MarginReport {
  double margin = 0.0;            // min over the grid of sigma_min(J^th) - |Lambda^th|
  double min_sigma_j = 0.0;       // min over the grid of sigma_min(J^th)
  double max_lambda_norm = 0.0;   // max over the grid of |Lambda^th|
  bool nondegenerate = true;      // false if some J^theta is numerically singular
  Vec worst_theta;
  std::size_t grid_size = 0;
};

MarginReport smallness_margin(const MetivierStructure& s, int grid_resolution = 0);

// Spectral norm of (rho I + B)^{-1} for skew B, or nullopt when the matrix
// is singular.
std::optional<double> skew_inverse_norm(double rho, const Mat& B);

}  // namespace hsm
