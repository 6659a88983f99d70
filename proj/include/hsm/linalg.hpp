#pragma once

#include <Eigen/Dense>

#include <vector>

namespace hsm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Singular values are counted toward the rank when they exceed this
// fraction of the largest one.
inline constexpr double kRankTolerance = 1e-7;

// Singular values in decreasing order.
Vec singular_values(const Mat& a);
double spectral_norm(const Mat& a);
double smallest_singular_value(const Mat& a);

struct RankReport {
  std::vector<double> singular_values;
  int rank = 0;
};

RankReport rank_with_tolerance(const Mat& a, double relative_tolerance = kRankTolerance);

// Max absolute entry of a + a^T.
double skew_defect(const Mat& a);

}  // namespace hsm
