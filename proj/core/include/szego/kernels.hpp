#pragma once

// Dense realizations of P A_lambda P for x-independent step symbols, on the
// lattice (exact) or in the continuum (midpoint Nystrom), and the two
// Hilbert-Schmidt routes to ||P A_lambda (I - P)||^2.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "szego/fourier.hpp"
#include "szego/setlib.hpp"
#include "szego/symbol.hpp"

namespace szego {

/// Dense Hermitian matrix, row-major. Real storage is used when every entry
/// is real (symmetric symbols).
struct HermitianMatrix {
  std::size_t n = 0;
  bool is_complex = false;
  std::vector<double> re;                 // n*n when !is_complex
  std::vector<std::complex<double>> cx;   // n*n when is_complex

  static HermitianMatrix real(std::size_t n);
  static HermitianMatrix complex(std::size_t n);

  std::complex<double> at(std::size_t i, std::size_t j) const {
    return is_complex ? cx[i * n + j] : std::complex<double>(re[i * n + j], 0.0);
  }
  void set(std::size_t i, std::size_t j, std::complex<double> v);

  double trace() const;
  /// sum |M_ij|^2, compensated.
  double frobenius_sq() const;
  double max_abs() const;
};

/// max |M - M^*| / max |M| (0 for the zero matrix).
double hermiticity_defect(const HermitianMatrix& m);

/// Kronecker product a (x) b.
HermitianMatrix kronecker(const HermitianMatrix& a, const HermitianMatrix& b);

/// One-dimensional kernel k_j(t) of a product symbol:
///   continuum: (lambda/2pi) int e^{i lambda xi t} sigma_j(xi) dxi
///   lattice:   (1/2pi) int_{-pi}^{pi} e^{i theta t} sigma_j(theta) dtheta
class Kernel1D {
 public:
  Kernel1D(const StepSymbol1D& sigma, double lambda, Mode mode);
  std::complex<double> operator()(double t) const;

 private:
  SymbolTransform transform_;
  double lambda_;
  Mode mode_;
};

/// K(x, y) = prod_j k_j(x_j - y_j).
std::complex<double> kernel_value(const StepSymbol& symbol, double lambda,
                                  std::span<const double> x, std::span<const double> y, Mode mode);

struct Axis {
  std::vector<double> nodes;
  std::vector<double> weights;
  /// Single run of equally spaced nodes with equal weights (Toeplitz fill).
  bool uniform = false;
};

/// Lattice: sites n with lambda*lo <= n < lambda*hi for every interval.
Axis lattice_axis(const IntervalUnion& omega, double lambda);
/// Continuum: cell-centred nodes per interval with spacing at most
/// 2 pi / (nodes_per_oscillation * lambda * xi_max).
Axis nystrom_axis(const IntervalUnion& omega, double lambda, double xi_max,
                  int nodes_per_oscillation);

/// Half-width of the hull of the support of sigma_j (0 when sigma_j = 0).
double bandwidth(const StepSymbol1D& sigma);

struct AssembleOptions {
  int nodes_per_oscillation = 16;
  /// Cap on the number of matrix entries (default 8192^2).
  double memory_budget_entries = 8192.0 * 8192.0;
  /// Build the full Kronecker product for d > 1. When false only the
  /// per-dimension factors exist.
  bool dense = true;
  unsigned threads = 1;
};

class OverlapOperator {
 public:
  double lambda() const noexcept { return lambda_; }
  Mode mode() const noexcept { return mode_; }
  const RegionSpec& region() const noexcept { return region_; }
  const StepSymbol& symbol() const noexcept { return symbol_; }
  std::size_t dimension() const noexcept { return axes_.size(); }
  std::size_t size() const noexcept;

  std::span<const Axis> axes() const noexcept { return axes_; }
  /// Per-dimension 1D operators; the full operator is their Kronecker product.
  std::span<const HermitianMatrix> factors() const noexcept { return factors_; }
  bool has_dense() const noexcept { return dense_ != nullptr; }
  /// The assembled n x n matrix. Throws UnsupportedError if it was not built.
  const HermitianMatrix& matrix() const;

  friend OverlapOperator assemble(const RegionSpec&, const StepSymbol&, double, Mode,
                                  const AssembleOptions&);
  friend OverlapOperator from_matrix(HermitianMatrix, double, Mode);

 private:
  double lambda_ = 0.0;
  Mode mode_ = Mode::lattice;
  RegionSpec region_;
  StepSymbol symbol_;
  std::vector<Axis> axes_;
  std::vector<HermitianMatrix> factors_;
  std::shared_ptr<const HermitianMatrix> dense_;
};

/// matrix_ab = w_a^{1/2} K(x_a, x_b) w_b^{1/2}. Requires lambda > 0 and
/// dim(region) == dim(symbol). Lattice symbols must lie in [-pi, pi].
OverlapOperator assemble(const RegionSpec& region, const StepSymbol& symbol, double lambda,
                         Mode mode, const AssembleOptions& opt = {});
OverlapOperator assemble(const RegionSpec& region, const StepSymbol& symbol, double lambda,
                         Mode mode, int resolution);

/// Wrap an existing matrix (tests, regression baselines).
OverlapOperator from_matrix(HermitianMatrix m, double lambda, Mode mode);

/// Structured 1D operator for a single-interval Omega: M_ab = t_{a-b},
/// t_{-m} = conj(t_m). Only the first column is stored, so sizes far beyond
/// the dense budget are fine.
struct ToeplitzOverlap {
  std::size_t n = 0;
  double lambda = 0.0;
  Mode mode = Mode::lattice;
  std::vector<std::complex<double>> column;

  double trace() const;
  double frobenius_sq() const;
  /// Tr M - Tr M^2, summed directly from the column.
  double hs_direct() const;
  HermitianMatrix to_dense() const;
};

ToeplitzOverlap toeplitz_overlap(const IntervalUnion& omega, const StepSymbol1D& sigma,
                                 double lambda, Mode mode, int nodes_per_oscillation = 16);

/// Tr M - Tr M^2 for a projection symbol; equals the particle-number
/// variance. For product operators it is combined from the factors.
double hs_cross_norm_direct(const OverlapOperator& op);
double hs_cross_norm_direct(const HermitianMatrix& m);

/// (lambda/2pi)^2 int_0^inf psi(lambda t) modulus_sq(Omega_j, t) dt per
/// dimension, combined over a product region. Continuum, projection symbols.
double hs_cross_norm_integral(const RegionSpec& omega, const StepSymbol& gamma, double lambda,
                              const QuadratureOptions& opt = {});

/// One-dimensional piece of the above (no product combination).
double hs_cross_norm_integral_1d(const IntervalUnion& omega, const StepSymbol1D& gamma,
                                 double lambda, const QuadratureOptions& opt = {});

/// The set where a projection symbol equals 1.
CompositeSet support_set(const StepSymbol1D& sigma);

/// Binary dump: 8-byte magic "SZGMAT01", uint64 n, double lambda,
/// uint32 mode, uint32 is_complex, then row-major doubles (re, im
/// interleaved when complex). Little-endian host order.
void write_matrix(std::ostream& os, const HermitianMatrix& m, double lambda, Mode mode);
HermitianMatrix read_matrix(std::istream& is, double* lambda = nullptr, Mode* mode = nullptr);

}  // namespace szego
