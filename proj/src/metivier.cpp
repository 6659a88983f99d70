#include "hsm/metivier.hpp"

#include "hsm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace hsm {

namespace {

// J^theta counts as singular when its smallest singular value falls below
// this multiple of max(1, |J^theta|).
constexpr double kSingularThreshold = 1e-12;

std::string shape(const Mat& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

}  // namespace

MetivierStructure::MetivierStructure(std::vector<Mat> J, Mat Lambda)
    : J_(std::move(J)), Lambda_(std::move(Lambda)) {
  if (J_.empty()) throw StructuralError("structure needs at least one skew form (m >= 1)");
  const Mat& first = J_.front();
  if (first.rows() != first.cols() || first.rows() == 0 || first.rows() % 2 != 0) {
    throw StructuralError("J_1 must be a nonempty square matrix of even size, got " + shape(first));
  }
  n_ = static_cast<int>(first.rows() / 2);
  for (std::size_t i = 0; i < J_.size(); ++i) {
    const Mat& Ji = J_[i];
    if (Ji.rows() != 2 * n_ || Ji.cols() != 2 * n_) {
      throw StructuralError("J_" + std::to_string(i + 1) + " has shape " + shape(Ji));
    }
    if (skew_defect(Ji) != 0.0) {
      throw StructuralError("J_" + std::to_string(i + 1) + " is not exactly skew-symmetric");
    }
  }
  if (Lambda_.rows() != m() || Lambda_.cols() != 2 * n_) {
    throw StructuralError("Lambda must be " + std::to_string(m()) + "x" + std::to_string(2 * n_) +
                          ", got " + shape(Lambda_));
  }
}

Mat MetivierStructure::J_theta(const Vec& theta) const {
  if (theta.size() != m()) throw StructuralError("theta has the wrong dimension");
  Mat out = Mat::Zero(2 * n_, 2 * n_);
  for (int i = 0; i < m(); ++i) out += theta(i) * J_[static_cast<std::size_t>(i)];
  return out;
}

Vec MetivierStructure::Lambda_theta(const Vec& theta) const {
  if (theta.size() != m()) throw StructuralError("theta has the wrong dimension");
  return Lambda_.transpose() * theta;
}

MetivierStructure MetivierStructure::with_lambda(Mat Lambda) const {
  return MetivierStructure(J_, std::move(Lambda));
}

void MetivierStructure::check_point(const GroupPoint& x) const {
  if (x.ubar.size() != 2 * n_ || x.bar.size() != m()) {
    throw StructuralError("group point has dimensions (" + std::to_string(x.ubar.size()) + "," +
                          std::to_string(x.bar.size()) + "), expected (" + std::to_string(2 * n_) +
                          "," + std::to_string(m()) + ")");
  }
}

GroupPoint identity_point(const MetivierStructure& s) {
  return {Vec::Zero(2 * s.n()), Vec::Zero(s.m())};
}

GroupPoint group_multiply(const MetivierStructure& s, const GroupPoint& x, const GroupPoint& y) {
  s.check_point(x);
  s.check_point(y);
  GroupPoint out{x.ubar + y.ubar, x.bar + y.bar};
  for (int i = 0; i < s.m(); ++i) out.bar(i) += x.ubar.dot(s.J(i) * y.ubar);
  return out;
}

GroupPoint group_inverse(const MetivierStructure& s, const GroupPoint& x) {
  s.check_point(x);
  return {-x.ubar, -x.bar};
}

GroupPoint dilate(const MetivierStructure& s, double t, const GroupPoint& x) {
  if (!(t > 0.0)) throw DomainError("dilation parameter must be positive");
  s.check_point(x);
  return {t * x.ubar, (t * t) * x.bar};
}

MetivierStructure standard_heisenberg(int n) {
  if (n < 1) throw DomainError("standard_heisenberg needs n >= 1");
  Mat J = Mat::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    J(n + j, j) = 0.5;
    J(j, n + j) = -0.5;
  }
  return MetivierStructure({J}, Mat::Zero(1, 2 * n));
}

MetivierStructure unit_heisenberg(int n) {
  if (n < 1) throw DomainError("unit_heisenberg needs n >= 1");
  Mat J = Mat::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    J(n + j, j) = 1.0;
    J(j, n + j) = -1.0;
  }
  return MetivierStructure({J}, Mat::Zero(1, 2 * n));
}

MetivierStructure quaternionic_htype(int blocks, int m) {
  if (blocks < 1) throw DomainError("quaternionic_htype needs blocks >= 1");
  if (m < 1) throw DomainError("quaternionic_htype needs m >= 1");
  if (m > 3) throw UnsupportedError("quaternionic construction supports at most m = 3");
  const int dim = 4 * blocks;
  if (m >= radon_hurwitz(dim)) throw UnsupportedError("m must stay below RH(2n)");
  // Columns are the images of 1, i, j, k under left multiplication.
  Mat Li(4, 4), Lj(4, 4), Lk(4, 4);
  Li << 0, -1, 0, 0,
        1, 0, 0, 0,
        0, 0, 0, -1,
        0, 0, 1, 0;
  Lj << 0, 0, -1, 0,
        0, 0, 0, 1,
        1, 0, 0, 0,
        0, -1, 0, 0;
  Lk << 0, 0, 0, -1,
        0, 0, -1, 0,
        0, 1, 0, 0,
        1, 0, 0, 0;
  const Mat units[3] = {Li, Lj, Lk};
  std::vector<Mat> J;
  for (int i = 0; i < m; ++i) {
    Mat Ji = Mat::Zero(dim, dim);
    for (int b = 0; b < blocks; ++b) Ji.block(4 * b, 4 * b, 4, 4) = units[i];
    J.push_back(Ji);
  }
  return MetivierStructure(std::move(J), Mat::Zero(m, dim));
}

int radon_hurwitz(int k) {
  if (k < 1) throw DomainError("radon_hurwitz needs k >= 1");
  int e = 0;
  while (k % 2 == 0) {
    k /= 2;
    ++e;
  }
  const int p = e / 4;
  const int q = e % 4;
  return 8 * p + (1 << q);
}

std::vector<Vec> theta_grid(int m, int resolution, std::uint64_t seed) {
  if (m < 1) throw DomainError("theta grid needs m >= 1");
  std::vector<Vec> grid;
  if (m == 1) {
    grid.push_back(Vec::Constant(1, 1.0));
    grid.push_back(Vec::Constant(1, -1.0));
    return grid;
  }
  if (resolution < 0) throw DomainError("grid resolution must be nonnegative");
  if (m == 2) {
    const int count = resolution > 0 ? resolution : 360;
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * k / count;
      Vec th(2);
      th << std::cos(a), std::sin(a);
      grid.push_back(th);
    }
    return grid;
  }
  const int count = resolution > 0 ? resolution : 10000;
  if (m == 3) {
    // Fibonacci lattice on S^2.
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      Vec th(3);
      th << r * std::cos(golden * k), r * std::sin(golden * k), z;
      grid.push_back(th);
    }
    return grid;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (static_cast<int>(grid.size()) < count) {
    Vec th(m);
    for (int i = 0; i < m; ++i) th(i) = normal(rng);
    const double len = th.norm();
    if (len > 1e-6) grid.push_back(th / len);
  }
  return grid;
}

MarginReport smallness_margin(const MetivierStructure& s, int grid_resolution) {
  MarginReport report;
  report.margin = std::numeric_limits<double>::infinity();
  report.min_sigma_j = std::numeric_limits<double>::infinity();
  const std::vector<Vec> grid = theta_grid(s.m(), grid_resolution);
  report.grid_size = grid.size();
  for (const Vec& th : grid) {
    const Vec sv = singular_values(s.J_theta(th));
    double smin = sv(sv.size() - 1);
    if (smin <= kSingularThreshold * std::max(1.0, sv(0))) {
      report.nondegenerate = false;
      smin = 0.0;
    }
    const double lam = s.Lambda_theta(th).norm();
    const double value = smin - lam;
    report.min_sigma_j = std::min(report.min_sigma_j, smin);
    report.max_lambda_norm = std::max(report.max_lambda_norm, lam);
    if (value < report.margin) {
      report.margin = value;
      report.worst_theta = th;
    }
  }
  return report;
}

std::optional<double> skew_inverse_norm(double rho, const Mat& B) {
  if (B.rows() != B.cols()) throw StructuralError("skew_inverse_norm needs a square matrix");
  const double scale = B.size() == 0 ? 1.0 : std::max(1.0, B.cwiseAbs().maxCoeff());
  if (skew_defect(B) > 1e-12 * scale) throw StructuralError("matrix is not skew-symmetric");
  const Eigen::Index N = B.rows();
  if (N % 2 == 1) {
    if (rho == 0.0) return std::nullopt;
    return 1.0 / std::abs(rho);
  }
  const double smin = N == 0 ? 0.0 : smallest_singular_value(B);
  const bool singular_B = N == 0 || smin <= kSingularThreshold * scale;
  if (singular_B) {
    if (rho == 0.0) return std::nullopt;
    return 1.0 / std::abs(rho);
  }
  return 1.0 / std::sqrt(rho * rho + smin * smin);
}

}  // namespace hsm
