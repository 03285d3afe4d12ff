#pragma once

// Experiment configuration for the runner. JSON with a schema_version field;
// unknown keys are rejected so that typos in tolerance overrides do not pass
// silently.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "szego/scaling.hpp"

namespace szego::cli {

inline constexpr int kSchemaVersion = 1;

/// Invalid configuration; maps to exit status 2. `field` is a JSON path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct Tolerances {
  int nodes_per_oscillation = 16;
  double quadrature_rel_tol = 1e-9;
  double sandwich_slack = 0.05;
  double sandwich_min_lambda = 16.0;
  double hs_agreement = 0.02;  // direct vs integral, relative
};

struct FractalSection {
  std::vector<double> betas;
  std::optional<int> depth;
  std::pair<double, double> tail_window{10.0, 1e4};
  int tail_points = 49;
};

struct VerifySection {
  bool lattice_only = false;
  bool inject_asymmetry = false;
};

struct ExperimentConfig {
  nlohmann::json source;  // echoed into every summary

  Mode mode = Mode::lattice;
  std::optional<RegionSpec> region;
  std::optional<StepSymbol> symbol;
  std::vector<double> lambdas;
  std::vector<Functional> functionals;
  bool variance_only = false;
  std::optional<double> p_fixed;
  bool svg = false;
  bool sandwich = false;  // also run the d=1 companion sweep and check the sandwich
  unsigned parallelism = 1;
  double memory_budget_entries = 8192.0 * 8192.0;
  Tolerances tol;
  FractalSection fractal;
  VerifySection verify;
};

/// Parses and validates; nothing is computed.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Experiment descriptor for scaling::sweep.
Experiment to_experiment(const ExperimentConfig& c);

}  // namespace szego::cli
