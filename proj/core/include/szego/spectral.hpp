#pragma once

// Spectra of overlap operators and the trace functionals built from them.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "szego/kernels.hpp"

namespace szego {

struct ClampReport {
  std::size_t count = 0;       // eigenvalues moved onto 0 or 1
  double max_excursion = 0.0;  // largest distance outside [0,1] before clamping
};

struct SpectralResult {
  std::vector<double> raw;          // ascending, as returned by the solver
  std::vector<double> eigenvalues;  // ascending; clamped to [0,1] for projections
  bool projection = false;
  ClampReport clamp;
  double lambda = 0.0;
  Mode mode = Mode::lattice;
  std::size_t n = 0;
};

inline constexpr double kClampTolerance = 1e-8;

enum class EigenRoute {
  automatic,  // Kronecker factors when the operator is a product, else dense
  dense,
  factors,
};

/// Full spectrum through LAPACK (dsyevd / zheevd, eigenvalues only). For
/// projection symbols values within kClampTolerance of [0,1] are clamped;
/// anything further out raises SpectrumError.
SpectralResult eigenvalues(const OverlapOperator& op, EigenRoute route = EigenRoute::automatic);
/// Raw ascending spectrum of a matrix.
std::vector<double> eigenvalues(const HermitianMatrix& m);
/// Ascending eigenpairs (vectors as columns of a row-major n x n array).
std::pair<std::vector<double>, HermitianMatrix> eigensystem(const HermitianMatrix& m);

/// Clamp a spectrum that should lie in [0,1].
SpectralResult clamp_projection_spectrum(std::vector<double> raw, double tol = kClampTolerance);

/// Binary entropy in bits, h(0) = h(1) = 0.
double binary_entropy(double t);

double entropy(const SpectralResult& s);
double variance(const SpectralResult& s);

/// f applied to eigenvalues: t^m, the binary entropy, or linear
/// interpolation in a user table with nodes ascending.
class Functional {
 public:
  enum class Kind { power, entropy_h, table };

  static Functional power(int m);
  static Functional entropy_h();
  static Functional table(std::vector<std::pair<double, double>> points);

  Kind kind() const noexcept { return kind_; }
  std::string name() const;
  double operator()(double t) const;

 private:
  Kind kind_ = Kind::power;
  int m_ = 1;
  std::vector<std::pair<double, double>> table_;
};

double trace_f(const SpectralResult& s, const Functional& f);

/// (lambda/2pi)^d mes(Omega) int f(sigma(xi)) dxi. On the lattice the
/// momentum integral runs over the torus [-pi,pi]^d (the complement of the
/// support contributes f(0)) and the prefactor is the site count times
/// (2pi)^{-d}.
double weyl_term(const RegionSpec& region, const StepSymbol& symbol, double lambda,
                 const Functional& f, Mode mode);
double weyl_term(const OverlapOperator& op, const Functional& f);

struct TraceReport {
  double trace_f = 0.0;
  double weyl_term = 0.0;
  double remainder = 0.0;
  std::string f_descriptor;
};

TraceReport szego_remainder(const OverlapOperator& op, const SpectralResult& s, const Functional& f);
TraceReport szego_remainder(const OverlapOperator& op, const Functional& f);

/// CSV rows: lambda,n,S,variance,trace_f,weyl,remainder
void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const SpectralResult& s, const TraceReport& r);

}  // namespace szego
