#pragma once

#include "hsm/config.hpp"
#include "hsm/region.hpp"

#include <string>

namespace hsm {

// Exit codes of the driver.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

struct CommandResult {
  int exit_code = kExitOk;
  std::string output;       // CSV or SVG, written by the caller
  std::string diagnostics;  // human-readable notes for stderr
};

// Each command validates its preconditions before any heavy work and
// throws ConfigError for inconsistent requests. Outputs depend only on the
// configuration, never on the worker count.
CommandResult run_group_check(const ExperimentConfig& cfg);
CommandResult run_geometry(const ExperimentConfig& cfg);
CommandResult run_counterexample(const ExperimentConfig& cfg);
CommandResult run_region(const ExperimentConfig& cfg, ExportFormat format);
CommandResult run_lemma_check(const ExperimentConfig& cfg);

}  // namespace hsm
