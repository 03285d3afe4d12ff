#pragma once

// Subcommand drivers. Each returns the process exit status:
// 0 success, 2 configuration error, 3 numerical failure.

#include <filesystem>
#include <optional>
#include <ostream>

#include "szego_cli/config.hpp"

namespace szego::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct RunOptions {
  std::filesystem::path out_dir = ".";
  /// Overrides the config's parallelism when set.
  std::optional<unsigned> parallelism;
  /// Accepted and echoed; the pipeline is deterministic and draws no random numbers.
  std::optional<long long> seed;
};

int run_sweep(ExperimentConfig config, const RunOptions& opt, std::ostream& log);
int run_fractal(ExperimentConfig config, const RunOptions& opt, std::ostream& log);
int run_verify(ExperimentConfig config, const RunOptions& opt, std::ostream& log);

/// Full command line: `<prog> {sweep|fractal|verify} --config FILE [--out DIR]
/// [--parallelism N] [--seed S]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace szego::cli
