#pragma once

#include "hsm/lattice.hpp"
#include "hsm/metivier.hpp"
#include "hsm/rational.hpp"
#include "hsm/sphere.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hsm {

enum class Family { Ball, Scaling, Knapp, SteinDensity, MomentCurve };

std::string_view to_string(Family f);
Family parse_family(std::string_view name);

// Resolution knobs shared by the family constructors.
struct ExampleOptions {
  int cap_nodes = 16;               // quadrature nodes across the thinnest cap direction
  double lattice_refinement = 1.0;  // multiplies every lattice axis count
  double time = 1.5;                // fixed time of the scaling family
  int time_grid = 0;                // replaces the family's selector by a t-grid when positive
};

// A lower-bound family at one scale. delta is the geometric scale, scale the
// normalized ladder value, with delta = scale / constant.
struct ExampleInstance {
  Family family;
  MetivierStructure structure;
  double delta;
  double scale;
  double constant;
  ScalarField field;
  Slab field_domain;  // carries the support of the field for its L^p norm
  Slab test_region;
  TimeSelector selector;
  SphereRule rule;
};

// Family constants C_circ, C_0, C_1 (1 for the moment curve and the density).
double family_constant(Family f, const MetivierStructure& s);

ExampleInstance ball_example(const MetivierStructure& s, double scale, const ExampleOptions& opt = {});
ExampleInstance scaling_example(const MetivierStructure& s, double scale, double t,
                                const ExampleOptions& opt = {});
// The frame of the Knapp family: u = Lambda^T / |Lambda| (e_1 when
// Lambda = 0), v = J u / |J u| and an orthonormal basis of the complement
// of V = span(u, v).
struct KnappFrame {
  Vec u;
  Vec v;
  std::vector<Vec> complement;
  Mat projection() const;  // onto V
};

// Throws UnsupportedError unless m = 1 and J^2 = -I.
KnappFrame knapp_frame(const MetivierStructure& s);

ExampleInstance knapp_example(const MetivierStructure& s, double scale, const ExampleOptions& opt = {});
ExampleInstance moment_example(double scale, const ExampleOptions& opt = {});
// Truncated density |ubar v|^{-(2n-1)} |log |ubar v||^{-alpha} on
// cutoff <= |ubar v| <= 1/2, |bar v| <= 1, probed at ubar x = 3/2 e_1.
ExampleInstance stein_example(const MetivierStructure& s, double alpha, double cutoff,
                              const ExampleOptions& opt = {});

// Exponent e with ratio ~ delta^e; infinite p or q are passed as infinity.
double predicted_exponent(Family f, int n, int m, double p, double q);
// The same in exact arithmetic on (1/p, 1/q).
Rational predicted_exponent_exact(Family f, int n, int m, const Rational& ip, const Rational& iq);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least squares of log ratio against log delta.
ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& points);

struct RatioOptions {
  std::optional<SphereRule> rule;  // overrides the instance rule
  double lattice_refinement = 1.0;
};

// |M f|_{L^q(test region)} / |f|_{L^p}.
double operator_ratio(const ExampleInstance& inst, double p, double q, const RatioOptions& opt = {});
// |f|_{L^p} over the instance's field domain.
double field_norm(const ExampleInstance& inst, double p, double refinement = 1.0);
// Maximal values at the test lattice points, in lattice order.
std::vector<double> test_region_values(const ExampleInstance& inst, const RatioOptions& opt = {});

// The instance transported by the left translation y -> z y: the field
// becomes f(z .), the regions are moved by z^{-1} and the selector follows.
ExampleInstance translate_instance(const ExampleInstance& inst, const GroupPoint& z);

struct LadderRow {
  double scale = 0.0;
  double delta = 0.0;
  double ratio = 0.0;
  double test_min = 0.0;  // smallest maximal value over the test lattice
};

struct LadderResult {
  Family family;
  int n = 0;
  int m = 0;
  double p = 0.0;
  double q = 0.0;
  double constant = 1.0;
  double predicted = 0.0;
  std::vector<LadderRow> rows;
  ExponentFit fit;

  bool passes(double tolerance, double min_r_squared = 0.98) const;
};

LadderResult run_ladder(Family family, const MetivierStructure& s, double p, double q,
                        const std::vector<double>& scales, const ExampleOptions& opt = {});

std::string format_number(double v);
std::string ladder_csv(const LadderResult& result);

struct SteinRow {
  int j = 0;
  double cutoff = 0.0;
  double value = 0.0;
  double increment = 0.0;  // value(j) - value(j-1), 0 for the first row
  double norm_pp = 0.0;    // |f|_{p_2}^{p_2} at this cutoff
};

struct SteinDiagnostic {
  double alpha = 0.0;
  int n = 1;
  std::vector<SteinRow> rows;
  bool monotone = false;
  ExponentFit increment_fit;     // increments against 1 / log(1/cutoff)
  double growth_exponent = 0.0;  // 1 - increment slope
  double expected_growth = 0.0;  // 1 - alpha
  double norm_tail = 0.0;        // last Cauchy increment of |f|_{p_2}^{p_2}
};

SteinDiagnostic stein_divergence(const MetivierStructure& s, double alpha, int j_min, int j_max,
                                 const ExampleOptions& opt = {});
std::string stein_csv(const SteinDiagnostic& diag);

}  // namespace hsm
