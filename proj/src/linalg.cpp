#include "hsm/linalg.hpp"

#include <limits>

namespace hsm {

Vec singular_values(const Mat& a) {
  if (a.size() == 0) return Vec();
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues();
}

double spectral_norm(const Mat& a) {
  Vec s = singular_values(a);
  return s.size() == 0 ? 0.0 : s(0);
}

double smallest_singular_value(const Mat& a) {
  Vec s = singular_values(a);
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

RankReport rank_with_tolerance(const Mat& a, double relative_tolerance) {
  RankReport report;
  Vec s = singular_values(a);
  report.singular_values.assign(s.data(), s.data() + s.size());
  if (s.size() == 0 || s(0) == 0.0) return report;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > relative_tolerance * s(0)) ++report.rank;
  }
  return report;
}

double skew_defect(const Mat& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  return (a + a.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace hsm
