#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

namespace lgdp {

enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitStore = 3, kExitInternal = 4 };

struct CommandOptions {
  std::filesystem::path config;
  /// Overrides the `output` key.
  std::optional<std::filesystem::path> out;
  /// Overrides the `seed` key.
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  /// validate: one or two draw stores (a fit directory or its draws/).
  std::vector<std::filesystem::path> stores;
};

/// ingest -> sample -> summarize -> diagnose -> export into the output
/// directory: draws/, estimates.csv, convergence.txt, run_manifest.txt.
/// Outputs of a failed run are removed.
int cmd_fit(const CommandOptions& options, std::ostream& log);

/// Validation tables for one store; with two stores also rmse.csv.
int cmd_validate(const CommandOptions& options, std::ostream& log);

/// Synthetic panel (panel.csv), its generating values (true_params.txt) and a
/// configuration that fits it (fit.cfg).
int cmd_simulate(const CommandOptions& options, std::ostream& log);

/// Parses `lgdp <fit|validate|simulate> ...` and dispatches.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lgdp
