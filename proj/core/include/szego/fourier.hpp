#pragma once

// Fourier transforms of indicator functions and step symbols, and tails of
// psi = |chi_hat|^2.
//
// Convention: chi_hat_A(u) = int_A e^{-iux} dx, so int |chi_hat_A|^2 = 2 pi mes(A).

#include <complex>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "szego/setlib.hpp"
#include "szego/symbol.hpp"

namespace szego {

/// chi_hat of a CompositeSet. Explicit intervals are summed in the
/// midpoint-phase form e^{-iuc} len sinc(u len / 2); Cantor pieces use the
/// self-similar recursion F_a = I_a + S_a F_{aQ^2}, which costs O(depth).
class SetTransform {
 public:
  SetTransform() = default;
  explicit SetTransform(const CompositeSet& a);

  std::complex<double> operator()(double u) const;
  double abs_sq(double u) const { return std::norm((*this)(u)); }

 private:
  struct Piece {
    bool cantor = false;
    IntervalUnion explicit_part;
    CantorPiece cantor_part;
  };
  std::vector<Piece> pieces_;
};

std::complex<double> interval_transform(double lo, double hi, double u);

/// |chi_hat_A(u)|^2; equals mes(A)^2 at u = 0.
double chi_hat_sq(const CompositeSet& a, double u);

struct QuadratureOptions {
  double rel_tol = 1e-9;
  int max_depth = 20;
};

/// GK15 on [a, b], bisected until err <= max(rel_tol * l1, floor(width, l1)).
/// Throws NumericalError past max_depth.
double panel_quadrature(const std::function<double(double)>& f, double a, double b,
                        const std::function<double(double, double)>& floor,
                        const QuadratureOptions& opt);

/// int_0^rho |chi_hat_A(u)|^2 du on panels of width pi / diam(A).
double head_integral(const CompositeSet& a, double rho, const QuadratureOptions& opt = {});

/// T(rho) = int_{|u| >= rho} |chi_hat_A(u)|^2 du = 2 pi mes(A) - 2 int_0^rho.
/// Clamped at zero when rounding pushes it below.
double tail_integral(const CompositeSet& a, double rho, const QuadratureOptions& opt = {});

/// Same quantity for an explicit interval union, from the sine integral:
/// T = 2 sum_{m,n} s_m s_n int_rho^inf cos(u (e_m - e_n)) / u^2 du over the
/// signed endpoints. Cost is quadratic in the endpoint count but independent
/// of the diameter.
double tail_integral_closed_form(const IntervalUnion& a, double rho);

inline constexpr std::size_t kClosedFormTailIntervals = 64;

struct TailProfile {
  std::vector<double> rho_grid;
  std::vector<double> tail_values;
  double fitted_exponent = 0.0;
  std::pair<double, double> fit_window{0.0, 0.0};
};

/// Tail values on a geometric grid over `window` (inclusive): closed form for
/// sets of at most kClosedFormTailIntervals intervals, else integrated
/// cumulatively, and the least-squares slope of log T against log rho.
TailProfile fit_tail_exponent(const CompositeSet& a, std::pair<double, double> window,
                              int n_points, const QuadratureOptions& opt = {});

/// Closed-form tail of the Cantor set computed from its generator: local
/// endpoints of each copy plus the gaps between copies, never absolute
/// coordinates. Works where the copies are too wide to materialize. At most
/// kClosedFormTailIntervals intervals, else UnsupportedError.
double cantor_tail_closed_form(const CantorParams& params, double rho);

/// Tail fit for the Cantor set: the generator form when it is small enough,
/// else the composite-set route.
TailProfile fit_tail_exponent(const CantorParams& params, std::pair<double, double> window,
                              int n_points, const QuadratureOptions& opt = {});

/// Least-squares slope of log y against log x.
double log_log_slope(std::span<const double> x, std::span<const double> y);

/// CSV with header comment "# fitted_exponent=..." then rows rho,tail.
void write_csv(std::ostream& os, const TailProfile& p);

/// F sigma_1 with one cached SetTransform per piece.
class SymbolTransform {
 public:
  SymbolTransform() = default;
  explicit SymbolTransform(const StepSymbol1D& sigma);
  std::complex<double> operator()(double u) const;

 private:
  std::vector<std::pair<SetTransform, double>> parts_;
};

/// Fourier transform of sigma_1 in the same convention.
std::complex<double> symbol_transform(const StepSymbol1D& sigma, double u);

/// psi(u) = phi(u) phi(-u) with phi = |F sigma|. For a product symbol u has
/// one component per dimension and psi factorizes.
double psi_for_symbol(const StepSymbol& sigma, std::span<const double> u);
double psi_for_symbol(const StepSymbol& sigma, double u);

}  // namespace szego
