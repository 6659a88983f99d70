#pragma once

#include "hsm/linalg.hpp"
#include "hsm/metivier.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace hsm {

// Points are flat: x = (x', x_{2n}, bar x) and y = (y', y_{2n}, bar y) in
// R^d with x' in R^{2n-1}. Gradients in (x, t) have d + 1 entries with t
// last.
class PhaseModel {
 public:
  explicit PhaseModel(MetivierStructure s);

  const MetivierStructure& structure() const { return s_; }
  int n() const { return s_.n(); }
  int m() const { return s_.m(); }
  int d() const { return s_.d(); }

  // g(w) = sqrt(1 - |w|^2) on the open unit ball of R^{2n-1}.
  static double g(const Vec& w);
  static Vec grad_g(const Vec& w);
  static Mat hess_g(const Vec& w);
  // h(w) = <w, grad g(w)> - g(w) = -1 / g(w).
  static double h(const Vec& w);
  static Vec grad_h(const Vec& w);

  // w = (x' - y') / t; throws DomainError outside the chart |w| < 1.
  Vec chart_variable(const Vec& x, double t, const Vec& y) const;

 private:
  MetivierStructure s_;
};

struct DefiningValues {
  double s2n = 0.0;
  Vec sbar;
};

DefiningValues defining_functions(const PhaseModel& pm, const Vec& x, double t, const Vec& y);
double phi(const PhaseModel& pm, const Vec& x, double t, const Vec& y);
// Xi = grad_{x,t} Phi from the closed-form derivatives.
Vec xi(const PhaseModel& pm, const Vec& x, double t, const Vec& y);
// The (d+1) x d matrix of columns Xi_{y_j}.
Mat xi_y(const PhaseModel& pm, const Vec& x, double t, const Vec& y);

double sigma_value(const PhaseModel& pm, const Vec& x, double t, const Vec& y);
// The y_{2n} solving sigma = 0 for the given bar y.
double solve_sigma_zero(const PhaseModel& pm, const Vec& x, double t, const Vec& ybar);

// det of the spatial rows of Xi_y, and the reduced (2n-1)-dimensional
// determinant det(sigma/t g'' + P J P^T + B - B^T).
double pi_xi_y_det(const PhaseModel& pm, const Vec& x, double t, const Vec& y);
double reduced_det(const PhaseModel& pm, const Vec& x, double t, const Vec& y);

struct HessianRank {
  RankReport full;     // Xi_y
  RankReport spatial;  // Pi Xi_y
};

HessianRank mixed_hessian_rank(const PhaseModel& pm, const Vec& x, double t, const Vec& y,
                               double tol = kRankTolerance);

// Unit left null vector of Xi_y with alpha_{2n} >= 0. Throws
// DegenerateInputError when Xi_y is rank deficient.
Vec normal_vector(const PhaseModel& pm, const Vec& x, double t, const Vec& y);

struct CurvatureMatrix {
  Mat matrix;
  RankReport rank;
};

// <N, Xi_{y_j y_l}> by Richardson-refined central differences of Xi_y.
CurvatureMatrix curvature_matrix(const PhaseModel& pm, const Vec& x, double t, const Vec& y, const Vec& N,
                                 double tol = kRankTolerance);
// Closed form [[c I, P A], [A^T P^T, 0]] valid at x' = y'.
Mat curvature_block_form(const PhaseModel& pm, const Vec& x, double t, const Vec& y, const Vec& N);

// c = t^-1 ubar a^T J^{ybar} e_{2n} - t^-2 a_{d+1} sigma - t^-1 a_{d+1} Lambda^{ybar} e_{2n}.
double c_value(const PhaseModel& pm, const Vec& x, double t, const Vec& y, const Vec& N);
// t^-1 |bar y| |ubar a| (sigma_min(J^th) - |Lambda^th|) with th = bar y / |bar y|.
double c_lower_bound(const PhaseModel& pm, double t, const Vec& ybar, const Vec& N);

struct FoldCone {
  Mat curvature;  // (d-1) x (d-1), parameters (y', bar y)
  RankReport rank;
  Vec normal;     // unit normal of the cone in R^d
  double gamma = 0.0;
  Mat M;          // 2n x m, columns -J_i ubar nu
  Mat block_form; // [[t^-1 gamma I, P M], [M^T P^T, 0]]
};

// The cone xi(y', bar y) = Pi Xi at y_{2n} = solve_sigma_zero(bar y).
FoldCone fold_cone_curvature(const PhaseModel& pm, const Vec& x, double t, const Vec& yprime, const Vec& ybar,
                             double tol = kRankTolerance);

struct FoldTransversality {
  double left = 0.0;   // derivative of det Pi Xi_y along the kernel vector in y
  double right = 0.0;  // derivative along the cokernel vector in x
  Vec kernel;
  Vec cokernel;
};

// Requires rank Pi Xi_y = d - 1; throws DegenerateInputError otherwise.
FoldTransversality fold_transversality(const PhaseModel& pm, const Vec& x, double t, const Vec& y,
                                       double tol = kRankTolerance);

struct ChartPoint {
  Vec x;
  double t = 1.0;
  Vec y;
};

// Seeded chart samples: |y'| <= 0.1, |ubar x - e_{2n}| <= 0.1, t in [1, 2],
// 1/2 <= |bar y| <= 2.
class ChartSampler {
 public:
  ChartSampler(const PhaseModel& pm, std::uint64_t seed);

  // y_{2n} drawn freely, rejecting |sigma| <= min_sigma.
  ChartPoint generic(double min_sigma = 0.1);
  // y_{2n} solved from sigma = 0.
  ChartPoint fold();
  // The same with x' = y'.
  ChartPoint diagonal();
  ChartPoint diagonal_fold();

 private:
  Vec ball(int dim, double radius);
  ChartPoint base(bool diagonal);

  const PhaseModel* pm_;
  std::mt19937_64 rng_;
};

struct CurvatureReport {
  ChartPoint point;
  double sigma = 0.0;
  Vec normal;
  double c_value = 0.0;
  double c_bound = 0.0;
  std::vector<double> singular_values_xi;
  std::vector<double> singular_values_curv;
  int rank_xi = 0;
  int rank_curv = 0;
};

// Normal, ranks and c at a point with x' = y'.
CurvatureReport certify_point(const PhaseModel& pm, const ChartPoint& p, double tol = kRankTolerance);

}  // namespace hsm
