#include "szego/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <cstdint>
#include <variant>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gsl/gsl_sf_expint.h>

#include "szego/error.hpp"

namespace szego {

namespace {

using cplx = std::complex<double>;

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
  }
  return std::sin(x) / x;
}

cplx phase(double t) { return {std::cos(t), -std::sin(t)}; }  // e^{-it}

cplx cantor_transform(const CantorPiece& p, double u) {
  cplx sum{0.0, 0.0};
  cplx mult{1.0, 0.0};
  double a = p.alpha;
  for (int k = 0; k <= p.depth; ++k) {
    sum += mult * interval_transform(a * p.Q, a * (p.Q + p.q), u);
    if (k == p.depth) break;
    const double a2 = a * p.Q * p.Q;
    mult *= cplx{1.0, 0.0} + phase(u * (a * p.Q - a2)) + phase(u * (a - a * p.Q)) +
            phase(u * (a - a2));
    a = a2;
  }
  return phase(u * p.offset) * sum;
}

}  // namespace

std::complex<double> interval_transform(double lo, double hi, double u) {
  const double len = hi - lo;
  return phase(u * 0.5 * (lo + hi)) * (len * sinc(0.5 * u * len));
}

SetTransform::SetTransform(const CompositeSet& a) {
  for (const auto& c : a.components()) {
    Piece p;
    if (const auto* u = std::get_if<IntervalUnion>(&c)) {
      p.explicit_part = *u;
    } else {
      p.cantor = true;
      p.cantor_part = std::get<CantorPiece>(c);
    }
    pieces_.push_back(std::move(p));
  }
}

std::complex<double> SetTransform::operator()(double u) const {
  cplx s{0.0, 0.0};
  for (const auto& p : pieces_) {
    if (p.cantor) {
      s += cantor_transform(p.cantor_part, u);
    } else {
      for (const auto& i : p.explicit_part.intervals()) s += interval_transform(i.lo, i.hi, u);
    }
  }
  return s;
}

double chi_hat_sq(const CompositeSet& a, double u) {
  if (a.empty()) throw DomainError("chi_hat_sq: empty set");
  if (u == 0.0) return a.measure() * a.measure();
  return SetTransform(a).abs_sq(u);
}

// ---------------------------------------------------------------------------

double panel_quadrature(const std::function<double(double)>& f, double a, double b,
                        const std::function<double(double, double)>& floor,
                        const QuadratureOptions& opt) {
  using boost::math::quadrature::gauss_kronrod;
  struct Job {
    double a, b;
    int depth;
  };
  std::vector<Job> stack{{a, b, 0}};
  double sum = 0.0;
  while (!stack.empty()) {
    const Job j = stack.back();
    stack.pop_back();
    double err = 0.0, l1 = 0.0;
    const double v = gauss_kronrod<double, 15>::integrate(f, j.a, j.b, 0, 0.0, &err, &l1);
    // Boost scales l1 to [a, b] but leaves err on [-1, 1].
    err *= 0.5 * (j.b - j.a);
    if (err <= std::max(opt.rel_tol * l1, floor(j.b - j.a, l1))) {
      sum += v;
      continue;
    }
    if (j.depth >= opt.max_depth)
      throw NumericalError("panel quadrature did not converge on [" + std::to_string(j.a) + ", " +
                               std::to_string(j.b) + "]",
                           l1 > 0.0 ? err / l1 : err);
    const double m = 0.5 * (j.a + j.b);
    stack.push_back({m, j.b, j.depth + 1});
    stack.push_back({j.a, m, j.depth + 1});
  }
  return sum;
}

namespace {

/// Integrates |chi_hat|^2 from 0 upward, panel by panel, and reports the
/// running integral at each requested point (ascending).
std::vector<double> cumulative_head(const CompositeSet& a, std::span<const double> points,
                                    const QuadratureOptions& opt) {
  const SetTransform tr(a);
  auto f = [&](double u) { return tr.abs_sq(u); };
  const double width = std::numbers::pi / std::max(a.diameter(), 1e-300);
  // The integrand is bounded by mes(A)^2. chi_hat also carries an absolute
  // rounding error of order eps * mes(A), so |chi_hat|^2 over a panel is only
  // known to 2 delta sqrt(width * l1).
  const double mes = a.measure();
  const double delta = 64.0 * std::numeric_limits<double>::epsilon() * mes;
  auto floor = [&](double w, double l1) {
    return std::max(1e-14 * mes * mes * w, 2.0 * delta * std::sqrt(w * l1));
  };

  std::vector<double> out;
  out.reserve(points.size());
  double acc = 0.0, comp = 0.0;  // Neumaier summation
  auto add = [&](double v) {
    const double t = acc + v;
    comp += std::abs(acc) >= std::abs(v) ? (acc - t) + v : (v - t) + acc;
    acc = t;
  };
  double x = 0.0;
  std::uint64_t panel = 1;  // right edge of the current panel is panel * width
  for (double target : points) {
    if (!(target >= x)) throw DomainError("head integral: points must be ascending and >= 0");
    while (x < target) {
      while (double(panel) * width <= x) ++panel;
      const double next = std::min(target, double(panel) * width);
      add(panel_quadrature(f, x, next, floor, opt));
      x = next;
    }
    out.push_back(acc + comp);
  }
  return out;
}

}  // namespace

double head_integral(const CompositeSet& a, double rho, const QuadratureOptions& opt) {
  if (a.empty()) return 0.0;
  if (rho < 0.0) throw DomainError("head integral: rho must be >= 0");
  const double pt[1] = {rho};
  return cumulative_head(a, pt, opt)[0];
}

double tail_integral(const CompositeSet& a, double rho, const QuadratureOptions& opt) {
  if (a.empty()) return 0.0;
  if (!(rho >= 0.0)) throw DomainError("tail integral: rho must be >= 0");
  const double t = 2.0 * std::numbers::pi * a.measure() - 2.0 * head_integral(a, rho, opt);
  return std::max(t, 0.0);
}

namespace {

// int_rho^inf cos(d u) / u^2 du.
double cos_tail(double d, double rho) {
  const double x = std::abs(d) * rho;
  if (x == 0.0) return 1.0 / rho;
  if (x <= 64.0) return (std::cos(x) - x * (std::numbers::pi / 2 - gsl_sf_Si(x))) / rho;
  // pi/2 - Si(x) = f cos x + g sin x; asymptotic f, g keep the cancellation
  // in 1 - x f(x) exact.
  const double r = 1.0 / (x * x);
  const double one_minus_xf = r * (2.0 - r * (24.0 - r * (720.0 - r * (40320.0 - r * 3628800.0))));
  const double xg = (1.0 / x) * (1.0 - r * (6.0 - r * (120.0 - r * (5040.0 - r * 362880.0))));
  return (std::cos(x) * one_minus_xf - std::sin(x) * xg) / rho;
}

std::size_t interval_count(const CompositeSet& a, std::size_t cap) {
  std::size_t n = 0;
  for (const auto& c : a.components()) {
    if (const auto* u = std::get_if<IntervalUnion>(&c)) {
      n += u->size();
    } else {
      std::size_t gen = 1;
      for (int k = 0; k <= std::get<CantorPiece>(c).depth && n <= cap; ++k, gen *= 4) n += gen;
    }
    if (n > cap) return n;
  }
  return n;
}

}  // namespace

double tail_integral_closed_form(const IntervalUnion& a, double rho) {
  if (!(rho > 0.0)) throw DomainError("closed-form tail: rho must be > 0");
  std::vector<std::pair<double, double>> e;  // endpoint, sign
  for (const auto& iv : a.intervals()) {
    e.emplace_back(iv.lo, 1.0);
    e.emplace_back(iv.hi, -1.0);
  }
  double acc = double(e.size()) / rho, comp = 0.0;  // Neumaier summation
  for (std::size_t m = 0; m < e.size(); ++m)
    for (std::size_t n = m + 1; n < e.size(); ++n) {
      const double t = 2.0 * e[m].second * e[n].second * cos_tail(e[m].first - e[n].first, rho);
      const double next = acc + t;
      comp += std::abs(acc) >= std::abs(t) ? (acc - next) + t : (t - next) + acc;
      acc = next;
    }
  return std::max(2.0 * (acc + comp), 0.0);
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw FitError("log-log slope: need >= 2 matched points");
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw FitError("log-log slope: nonpositive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx == 0.0) throw FitError("log-log slope: x values coincide");
  return sxy / sxx;
}

namespace {

TailProfile tail_grid(std::pair<double, double> window, int n_points) {
  if (!(window.first >= 1.0 && window.second > window.first))
    throw DomainError("tail fit: window must satisfy 1 <= lo < hi");
  if (n_points < 4) throw DomainError("tail fit: need at least 4 grid points");
  TailProfile p;
  p.fit_window = window;
  const double ratio = std::log(window.second / window.first) / double(n_points - 1);
  for (int i = 0; i < n_points; ++i)
    p.rho_grid.push_back(i == n_points - 1 ? window.second : window.first * std::exp(ratio * i));
  return p;
}

}  // namespace

double cantor_tail_closed_form(const CantorParams& params, double rho) {
  if (!(rho > 0.0)) throw DomainError("closed-form tail: rho must be > 0");
  if (cantor_interval_count(params) > kClosedFormTailIntervals)
    throw UnsupportedError("closed-form tail: too many intervals for the generator form");

  // Endpoint k of a copy in coordinates from its left edge (l) and from its
  // right edge (r). Omega_alpha is symmetric about alpha/2, so r_k = -l_{M-1-k}.
  struct Copy {
    std::vector<double> l, r, sign;
  };
  std::vector<Copy> copies;
  std::vector<double> width;
  double alpha = 1.0;
  for (int j = 0; j <= params.N; ++j, alpha *= params.gamma) {
    Copy c;
    const IntervalUnion omega = build_cantor_omega(params, alpha);
    for (const auto& iv : omega.intervals()) {
      c.l.push_back(iv.lo), c.sign.push_back(1.0);
      c.l.push_back(iv.hi), c.sign.push_back(-1.0);
    }
    for (std::size_t k = c.l.size(); k-- > 0;) c.r.push_back(-c.l[k]);
    copies.push_back(std::move(c));
    width.push_back(alpha);
  }

  double acc = 0.0, comp = 0.0;
  auto add = [&](double t) {
    const double next = acc + t;
    comp += std::abs(acc) >= std::abs(t) ? (acc - next) + t : (t - next) + acc;
    acc = next;
  };
  for (std::size_t m = 0; m < copies.size(); ++m) {
    const Copy& a = copies[m];
    add(double(a.l.size()) / rho);
    for (std::size_t i = 0; i < a.l.size(); ++i)
      for (std::size_t k = i + 1; k < a.l.size(); ++k) add(2.0 * a.sign[i] * a.sign[k] * cos_tail(a.l[i] - a.l[k], rho));
    // Copy m sits left of copy n < m; the hulls are separated by one unit per
    // gap plus the widths of the copies in between.
    double gap = 1.0;
    for (std::size_t n = m; n-- > 0;) {
      const Copy& b = copies[n];
      for (std::size_t i = 0; i < a.r.size(); ++i)
        for (std::size_t k = 0; k < b.l.size(); ++k)
          add(2.0 * a.sign[i] * b.sign[k] * cos_tail(a.r[i] - b.l[k] - gap, rho));
      gap += width[n] + 1.0;
    }
  }
  return std::max(2.0 * (acc + comp), 0.0);
}

TailProfile fit_tail_exponent(const CantorParams& params, std::pair<double, double> window, int n_points,
                              const QuadratureOptions& opt) {
  if (cantor_interval_count(params) > kClosedFormTailIntervals)
    return fit_tail_exponent(cantor_composite(params), window, n_points, opt);
  TailProfile p = tail_grid(window, n_points);
  for (double rho : p.rho_grid) p.tail_values.push_back(cantor_tail_closed_form(params, rho));
  p.fitted_exponent = log_log_slope(p.rho_grid, p.tail_values);
  return p;
}

TailProfile fit_tail_exponent(const CompositeSet& a, std::pair<double, double> window, int n_points,
                              const QuadratureOptions& opt) {
  if (a.empty()) throw DomainError("tail fit: empty set");
  TailProfile p = tail_grid(window, n_points);

  const bool closed = interval_count(a, kClosedFormTailIntervals) <= kClosedFormTailIntervals;
  const IntervalUnion explicit_set = closed ? a.materialize() : IntervalUnion{};
  const auto head = closed ? std::vector<double>{} : cumulative_head(a, p.rho_grid, opt);
  const double total = 2.0 * std::numbers::pi * a.measure();
  for (std::size_t i = 0; i < p.rho_grid.size(); ++i) {
    const double t = closed ? tail_integral_closed_form(explicit_set, p.rho_grid[i]) : total - 2.0 * head[i];
    if (!(t > 0.0))
      throw FitError("tail fit: degenerate tail T(" + std::to_string(p.rho_grid[i]) + ") <= 0");
    p.tail_values.push_back(t);
  }
  p.fitted_exponent = log_log_slope(p.rho_grid, p.tail_values);
  return p;
}

void write_csv(std::ostream& os, const TailProfile& p) {
  const auto prec = os.precision(17);
  os << "# fitted_exponent=" << p.fitted_exponent << " window=" << p.fit_window.first << ","
     << p.fit_window.second << "\n";
  os << "rho,tail\n";
  for (std::size_t i = 0; i < p.rho_grid.size(); ++i)
    os << p.rho_grid[i] << "," << p.tail_values[i] << "\n";
  os.precision(prec);
}

// ---------------------------------------------------------------------------

SymbolTransform::SymbolTransform(const StepSymbol1D& sigma) {
  for (const auto& p : sigma.pieces())
    if (p.value != 0.0) parts_.emplace_back(SetTransform(p.cell), p.value);
}

std::complex<double> SymbolTransform::operator()(double u) const {
  cplx s{0.0, 0.0};
  for (const auto& [t, v] : parts_) s += v * t(u);
  return s;
}

std::complex<double> symbol_transform(const StepSymbol1D& sigma, double u) {
  return SymbolTransform(sigma)(u);
}

double psi_for_symbol(const StepSymbol& sigma, std::span<const double> u) {
  if (u.size() != sigma.dimension())
    throw DimensionError("psi_for_symbol: u has " + std::to_string(u.size()) +
                         " components, symbol has dimension " +
                         std::to_string(sigma.dimension()));
  double psi = 1.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const SymbolTransform t(sigma.factor(j));
    psi *= std::abs(t(u[j])) * std::abs(t(-u[j]));
  }
  return psi;
}

double psi_for_symbol(const StepSymbol& sigma, double u) {
  const double uu[1] = {u};
  return psi_for_symbol(sigma, uu);
}

}  // namespace szego
