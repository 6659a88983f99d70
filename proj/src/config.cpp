#include "hsm/config.hpp"

#include "hsm/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hsm {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    out.push_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw ConfigError("key '" + key + "': value '" + value + "' " + why);
}

double to_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    bad(key, value, "is not a finite number");
  }
  return out;
}

long long to_integer(const std::string& key, const std::string& value) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) bad(key, value, "is not an integer");
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  const long long v = to_integer(key, value);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) bad(key, value, "is out of range");
  return static_cast<int>(v);
}

std::vector<double> to_reals(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const std::string& part : split(value, ',')) out.push_back(to_real(key, part));
  return out;
}

// "2^-k" or a plain number.
double scale_value(const std::string& text) {
  if (text.rfind("2^", 0) == 0) {
    const int e = to_int("deltas", text.substr(2));
    return std::ldexp(1.0, e);
  }
  return to_real("deltas", text);
}

}  // namespace

double Exponent::value() const {
  if (inverse.numerator() == 0) return std::numeric_limits<double>::infinity();
  return 1.0 / to_double(inverse);
}

std::string Exponent::text() const {
  if (inverse.numerator() == 0) return "inf";
  return to_string(1 / inverse);
}

Exponent parse_exponent(std::string_view text) {
  const std::string s = trim(text);
  if (s == "inf" || s == "infinity") return Exponent{Rational(0)};
  Rational r;
  try {
    r = parse_rational(s);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("exponent: ") + e.what());
  }
  if (r < 1) throw ConfigError("exponent '" + s + "' must be >= 1");
  return Exponent{1 / r};
}

std::vector<double> parse_scales(std::string_view text) {
  const std::string s = trim(text);
  std::vector<double> out;
  const auto range = s.find("..");
  if (range != std::string::npos) {
    const std::string a = trim(s.substr(0, range)), b = trim(s.substr(range + 2));
    if (a.rfind("2^", 0) != 0 || b.rfind("2^", 0) != 0) throw ConfigError("ranges must look like 2^-3..2^-7");
    const int ea = to_int("deltas", a.substr(2)), eb = to_int("deltas", b.substr(2));
    if (eb > ea) throw ConfigError("delta ranges must decrease");
    for (int e = ea; e >= eb; --e) out.push_back(std::ldexp(1.0, e));
  } else {
    for (const std::string& part : split(s, ',')) out.push_back(scale_value(part));
  }
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "structure",  "n",         "m",          "lambda",      "family",      "p",           "q",
      "deltas",     "sphere_nodes", "lattice", "tgrid",       "seed",        "points",      "fold_points",
      "threads",    "t",         "alpha",      "stein_j_min", "stein_j_max", "tolerance",   "region_kind",
      "margin_grid", "rho",      "lemma_samples", "samples", "stein_tolerance"};
  return keys;
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value', got '" + body + "'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end()) {
      throw ConfigError("line " + std::to_string(number) + ": unknown key '" + key + "'");
    }
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::pair<std::string, std::string> parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(text) + "' is not key=value");
  std::string key = trim(text.substr(0, eq));
  if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end()) {
    throw ConfigError("unknown key '" + key + "'");
  }
  return {key, trim(text.substr(eq + 1))};
}

ExperimentConfig build_config(const std::map<std::string, std::string>& entries) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : entries) {
    if (key == "structure") cfg.structure = value;
    else if (key == "n") cfg.n = to_int(key, value);
    else if (key == "m") cfg.m = to_int(key, value);
    else if (key == "lambda") cfg.lambda = value.empty() ? std::vector<double>{} : to_reals(key, value);
    else if (key == "family") cfg.family = value;
    else if (key == "p") cfg.p = parse_exponent(value);
    else if (key == "q") cfg.q = parse_exponent(value);
    else if (key == "deltas") cfg.scales = parse_scales(value);
    else if (key == "sphere_nodes") cfg.sphere_nodes = to_int(key, value);
    else if (key == "lattice") cfg.lattice = to_real(key, value);
    else if (key == "tgrid") cfg.tgrid = to_int(key, value);
    else if (key == "seed") {
      const long long s = to_integer(key, value);
      if (s < 0) bad(key, value, "must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "points") cfg.points = to_int(key, value);
    else if (key == "fold_points") cfg.fold_points = to_int(key, value);
    else if (key == "threads") cfg.threads = to_int(key, value);
    else if (key == "t") cfg.t = to_real(key, value);
    else if (key == "alpha") cfg.alpha = to_real(key, value);
    else if (key == "stein_j_min") cfg.stein_j_min = to_int(key, value);
    else if (key == "stein_j_max") cfg.stein_j_max = to_int(key, value);
    else if (key == "tolerance") cfg.tolerance = to_real(key, value);
    else if (key == "region_kind") cfg.region_kind = value;
    else if (key == "margin_grid") cfg.margin_grid = to_int(key, value);
    else if (key == "rho") cfg.rho = value.empty() ? std::vector<double>{} : to_reals(key, value);
    else if (key == "lemma_samples") cfg.lemma_samples = to_int(key, value);
    else if (key == "samples") cfg.samples = to_int(key, value);
    else if (key == "stein_tolerance") cfg.stein_tolerance = to_real(key, value);
    else throw ConfigError("unknown key '" + key + "'");
  }
  validate(cfg);
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.structure != "heisenberg" && cfg.structure != "quaternionic") {
    throw ConfigError("structure must be heisenberg or quaternionic");
  }
  if (cfg.n < 1 || cfg.n > 16) throw ConfigError("n must lie in 1..16");
  if (cfg.structure == "heisenberg" && cfg.m != 1) throw ConfigError("heisenberg structures have m = 1");
  if (cfg.structure == "quaternionic" && (cfg.m < 1 || cfg.m > 3 || cfg.n % 2 != 0)) {
    throw ConfigError("quaternionic structures need m in 1..3 and even n (blocks = n / 2)");
  }
  if (!cfg.lambda.empty() && cfg.lambda.size() != static_cast<std::size_t>(cfg.m * 2 * cfg.n)) {
    throw ConfigError("lambda needs m * 2n = " + std::to_string(cfg.m * 2 * cfg.n) + " entries");
  }
  try {
    (void)parse_family(cfg.family);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.scales.empty()) throw ConfigError("deltas must not be empty");
  for (double s : cfg.scales) {
    if (!(s > 0.0 && s <= 1.0)) throw ConfigError("deltas must lie in (0, 1]");
  }
  if (cfg.sphere_nodes < 4) throw ConfigError("sphere_nodes must be >= 4");
  if (!(cfg.lattice > 0.0)) throw ConfigError("lattice must be positive");
  if (cfg.tgrid != 0 && cfg.tgrid < 2) throw ConfigError("tgrid must be 0 or >= 2");
  if (cfg.points < 1 || cfg.fold_points < 0) throw ConfigError("points must be >= 1 and fold_points >= 0");
  if (cfg.threads < 0) throw ConfigError("threads must be >= 0");
  if (!(cfg.t >= 1.0 && cfg.t <= 2.0)) throw ConfigError("t must lie in [1, 2]");
  if (cfg.stein_j_min < 2 || cfg.stein_j_max < cfg.stein_j_min + 3) {
    throw ConfigError("stein_j_min >= 2 and stein_j_max >= stein_j_min + 3 are required");
  }
  if (!(cfg.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (cfg.region_kind != "maximal" && cfg.region_kind != "averaging") {
    throw ConfigError("region_kind must be maximal or averaging");
  }
  if (cfg.margin_grid < 0) throw ConfigError("margin_grid must be >= 0");
  if (cfg.lemma_samples < 1 || cfg.samples < 1) throw ConfigError("lemma_samples and samples must be >= 1");
  if (!(cfg.stein_tolerance > 0.0)) throw ConfigError("stein_tolerance must be positive");
}

MetivierStructure make_structure(const ExperimentConfig& cfg) {
  MetivierStructure s = cfg.structure == "heisenberg" ? standard_heisenberg(cfg.n)
                                                      : quaternionic_htype(cfg.n / 2, cfg.m);
  if (!cfg.lambda.empty()) {
    Mat L(cfg.m, 2 * cfg.n);
    for (int i = 0; i < cfg.m; ++i) {
      for (int k = 0; k < 2 * cfg.n; ++k) L(i, k) = cfg.lambda[static_cast<std::size_t>(i * 2 * cfg.n + k)];
    }
    s = s.with_lambda(L);
  }
  return s;
}

ExampleOptions example_options(const ExperimentConfig& cfg) {
  ExampleOptions opt;
  opt.cap_nodes = cfg.sphere_nodes;
  opt.lattice_refinement = cfg.lattice;
  opt.time = cfg.t;
  return opt;
}

}  // namespace hsm
