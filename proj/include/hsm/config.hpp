#pragma once

#include "hsm/counterexamples.hpp"
#include "hsm/metivier.hpp"
#include "hsm/rational.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hsm {

// Malformed or inconsistent configuration; the driver maps it to exit 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An exponent given as "inf" or a rational "a/b" >= 1, kept as 1/p.
struct Exponent {
  Rational inverse{0};
  double value() const;
  std::string text() const;
};

Exponent parse_exponent(std::string_view text);

// Scales given as "2^-3..2^-7", "2^-4" or a comma separated list.
std::vector<double> parse_scales(std::string_view text);

struct ExperimentConfig {
  std::string structure = "heisenberg";  // heisenberg | quaternionic
  int n = 2;
  int m = 1;
  std::vector<double> lambda;  // m x 2n row-major, empty for zero
  std::string family = "ball";
  Exponent p{Rational(1, 2)};
  Exponent q{Rational(1, 2)};
  std::vector<double> scales{0.125, 0.0625, 0.03125};
  int sphere_nodes = 16;
  double lattice = 1.0;
  int tgrid = 0;  // 0 keeps the family's own time selector
  std::uint64_t seed = 1;
  int points = 100;
  int fold_points = 50;
  int threads = 1;
  double t = 1.5;
  double alpha = 0.9;
  int stein_j_min = 10;
  int stein_j_max = 30;
  double tolerance = 0.15;
  std::string region_kind = "maximal";  // maximal | averaging
  int margin_grid = 0;
  std::vector<double> rho;  // lemma-check values of rho, empty for the default sweep
  int lemma_samples = 200;
  int samples = 1000;            // group-check samples per law
  double stein_tolerance = 0.2;  // allowed error of the Stein growth exponent
};

// Every key accepted in config files and --set overrides.
const std::vector<std::string>& config_keys();

// Parses "key = value" lines; '#' starts a comment. Throws ConfigError with
// the offending line number.
std::map<std::string, std::string> parse_config_text(std::string_view text);
std::map<std::string, std::string> read_config_file(const std::string& path);
// Splits "key=value".
std::pair<std::string, std::string> parse_override(std::string_view text);

// Applies the entries and validates the result. Throws ConfigError.
ExperimentConfig build_config(const std::map<std::string, std::string>& entries);
void validate(const ExperimentConfig& cfg);

MetivierStructure make_structure(const ExperimentConfig& cfg);
ExampleOptions example_options(const ExperimentConfig& cfg);

}  // namespace hsm
