#include "hsm/config.hpp"
#include "hsm/errors.hpp"
#include "hsm/harness.hpp"
#include "hsm/parallel.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out_path;
  std::string format = "csv";
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "flat key = value configuration file");
  cmd->add_option("--seed", flags.seed, "64-bit seed");
  cmd->add_option("--threads", flags.threads, "worker threads (0 for all cores)");
  cmd->add_option("--out", flags.out_path, "output file (stdout when omitted)");
  cmd->add_option("--format", flags.format, "csv or svg")->check(CLI::IsMember({"csv", "svg"}));
  cmd->add_option("--set", flags.overrides, "override a key, key=value (repeatable)");
}

hsm::ExperimentConfig load(const CommonFlags& flags) {
  std::map<std::string, std::string> entries;
  if (!flags.config_path.empty()) entries = hsm::read_config_file(flags.config_path);
  if (flags.seed) entries["seed"] = std::to_string(*flags.seed);
  if (flags.threads) entries["threads"] = std::to_string(*flags.threads);
  for (const std::string& o : flags.overrides) {
    const auto [key, value] = hsm::parse_override(o);
    entries[key] = value;
  }
  return hsm::build_config(entries);
}

int emit(const hsm::CommandResult& r, const std::string& out_path) {
  std::cerr << r.diagnostics;
  if (out_path.empty()) {
    std::cout << r.output;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write '" << out_path << "'\n";
      return hsm::kExitConfig;
    }
    out << r.output;
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical maximal functions on Metivier groups: experiment driver"};
  app.require_subcommand(1);
  CommonFlags flags;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"group-check", "group-law, dilation, H-type and smallness-margin checks"},
      {"geometry", "rank, curvature and fold certificates at seeded chart points"},
      {"counterexample", "delta ladder of a lower-bound family and its fitted exponent"},
      {"region", "exact (1/p, 1/q) region as CSV or SVG"},
      {"lemma-check", "skew inverse-norm formula against brute force"}};
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? hsm::kExitOk : hsm::kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const hsm::ExperimentConfig cfg = load(flags);
    hsm::set_thread_count(cfg.threads);
    if (flags.format == "svg" && command != "region") {
      throw hsm::ConfigError("--format svg is only available for region");
    }
    hsm::CommandResult result;
    if (command == "group-check") result = hsm::run_group_check(cfg);
    else if (command == "geometry") result = hsm::run_geometry(cfg);
    else if (command == "counterexample") result = hsm::run_counterexample(cfg);
    else if (command == "region") {
      result = hsm::run_region(cfg, flags.format == "svg" ? hsm::ExportFormat::Svg : hsm::ExportFormat::Csv);
    } else result = hsm::run_lemma_check(cfg);
    return emit(result, flags.out_path);
  } catch (const hsm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return hsm::kExitConfig;
  } catch (const hsm::StructuralError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return hsm::kExitConfig;
  } catch (const hsm::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return hsm::kExitConfig;
  } catch (const hsm::UnsupportedError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return hsm::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hsm::kExitFailure;
  }
}
