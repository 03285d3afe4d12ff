#pragma once

// lambda sweeps, scaling-law regressions, the Widom coefficient for box
// regions, and the entropy bound checks.

#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "szego/kernels.hpp"
#include "szego/spectral.hpp"

namespace szego {

/// lambda_0 * 2^{k / points_per_octave} up to lambda_max (inclusive within
/// rounding).
std::vector<double> dyadic_grid(double lambda_min, double lambda_max, int points_per_octave = 1);

enum class Quantity { entropy, variance, particle_number };
std::string to_string(Quantity q);

struct SweepPoint {
  double lambda = 0.0;
  std::size_t n = 0;
  bool ok = false;
  std::string error;
  std::string route;  // "eigen", "dense-trace", "toeplitz"
  double entropy = std::numeric_limits<double>::quiet_NaN();
  double variance = std::numeric_limits<double>::quiet_NaN();
  double particle_number = std::numeric_limits<double>::quiet_NaN();
  double min_entropy_gap = std::numeric_limits<double>::quiet_NaN();  // min_k h(e_k) - 4e_k(1-e_k)
  ClampReport clamp;
  std::vector<TraceReport> traces;  // one per requested functional
};

struct Experiment {
  RegionSpec omega;
  StepSymbol symbol;
  Mode mode = Mode::continuum;
  std::vector<double> lambdas;
  AssembleOptions assemble;
  /// Eigen-decomposition is needed for entropy and general functionals;
  /// variance alone can be had from Tr M - Tr M^2.
  bool need_spectrum = true;
  std::vector<Functional> functionals;
  EigenRoute eigen_route = EigenRoute::automatic;
  unsigned parallelism = 1;
  /// Minimum lambda accepted by the sweep.
  double lambda_floor = 2.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;  // sorted by lambda
  std::string omega_descriptor;
  std::string symbol_descriptor;
  std::size_t failures = 0;

  /// Successful points only.
  std::vector<double> lambdas() const;
  std::vector<double> values(Quantity q) const;
};

/// Runs one pipeline per lambda on a bounded worker pool. Failed lambdas
/// are recorded; more than 20% failures aborts with NumericalError.
SweepResult sweep(const Experiment& e);

/// One pipeline run (what sweep does per lambda); throws on failure.
SweepPoint run_point(const Experiment& e, double lambda);

enum class FitModel { pure_power, power_log };

struct ScalingFit {
  FitModel model = FitModel::pure_power;
  double exponent = 0.0;
  double coeff_a = 0.0;  // lambda^p log2(lambda)
  double coeff_b = 0.0;  // lambda^p
  double rms_residual = 0.0;
  /// Half-range of local (successive) exponent estimates over the window.
  double exponent_half_range = 0.0;
};

/// y ~ a lambda^p log2(lambda) + b lambda^p, residuals measured relative to
/// |y|. With p_fixed the problem is linear. Otherwise p minimizes the
/// projected residual, located on a grid over p_range and polished by
/// solving d(RSS)/dp = 0.
ScalingFit fit_power_log(std::span<const double> lambda, std::span<const double> y,
                         std::optional<double> p_fixed = std::nullopt,
                         std::pair<double, double> p_range = {-2.0, 4.0});

/// y ~ b lambda^p by least squares on logs; rms residual in log space.
ScalingFit fit_pure_power(std::span<const double> lambda, std::span<const double> y);

/// log(y_{k+1}/y_k) / log(lambda_{k+1}/lambda_k).
std::vector<double> local_exponents(std::span<const double> lambda, std::span<const double> y);
/// y_{k+1} - y_k.
std::vector<double> successive_differences(std::span<const double> y);

struct FacePair {
  std::size_t axis = 0;
  double omega_face = 0.0;  // coordinate of the face along `axis`
  double gamma_face = 0.0;
  double omega_area = 0.0;
  double gamma_area = 0.0;
  double contribution = 0.0;  // scaled by (1/12)(2pi)^{1-d}
};

struct WidomCoefficient {
  double value = 0.0;
  std::vector<FacePair> face_pairs;
};

/// (1/12)(2pi)^{1-d} int int |n_x . n_xi| over axis-aligned box unions.
/// Gamma is taken in radians (cycles are converted).
WidomCoefficient widom_coefficient(const RegionSpec& omega, const RegionSpec& gamma);

struct SandwichRow {
  double lambda = 0.0;
  double s_d = 0.0;
  double s_1 = 0.0;
  double prefactor_literal = 0.0;     // (lambda/2pi)^{d-1}
  double prefactor_normalized = 0.0;  // N_1^{d-1}, N_1 = lambda mes(Gamma_1)/2pi
  double ratio_literal = 0.0;         // s_d / (prefactor * s_1)
  double ratio_normalized = 0.0;
  bool gated = false;  // lambda below the asymptotic gate, not counted
  bool pass_literal = false;
  bool pass_normalized = false;
};

struct SandwichReport {
  std::size_t d = 1;
  double slack = 0.05;
  double min_lambda = 16.0;
  std::vector<SandwichRow> rows;
  double pass_fraction_normalized = 0.0;
  double pass_fraction_literal = 0.0;
  bool pass = false;  // every gated-in row passes in the normalized convention
};

struct SandwichOptions {
  double slack = 0.05;
  double min_lambda = 16.0;
  /// mes(Gamma_1) in radians, for the normalized prefactor.
  double gamma_measure = std::numbers::pi;
};

/// (1/2) N S_1 <= S_d <= d N S_1 with declared slack, per lambda.
SandwichReport check_sandwich(const SweepResult& sweep_d, const SweepResult& sweep_1, std::size_t d,
                              const SandwichOptions& opt = {});

struct EntropyVarianceRow {
  double lambda = 0.0;
  double entropy = 0.0;
  double variance = 0.0;
  bool lower_ok = false;   // S >= 4 (Delta N)^2
  double ratio = 0.0;      // S / (log2(lambda) (Delta N)^2)
};

struct EntropyVarianceReport {
  std::vector<EntropyVarianceRow> rows;
  bool lower_bound_holds = false;
  /// Smallest C with S <= C log2(lambda) (Delta N)^2 over lambda >= 4.
  double fitted_c = 0.0;
};

EntropyVarianceReport check_entropy_variance(const SweepResult& entropy_sweep,
                                             const SweepResult& variance_sweep);

}  // namespace szego
