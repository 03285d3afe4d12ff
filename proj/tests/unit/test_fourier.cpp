#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <algorithm>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "szego/error.hpp"
#include "szego/fourier.hpp"

using namespace szego;
using std::numbers::pi;

namespace {

IntervalUnion random_union(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> len(0.1, 1.5), gap(0.1, 1.0), start(-2.0, 1.0);
  std::vector<Interval> iv;
  double x = start(rng);
  for (int k = count(rng); k > 0; --k) {
    const double l = len(rng);
    iv.push_back({x, x + l});
    x += l + gap(rng);
  }
  return IntervalUnion(iv);
}

// int_A e^{-iux} dx by tanh-sinh on each interval, cos and sin separately.
std::complex<double> quadrature_transform(const IntervalUnion& a, double u) {
  boost::math::quadrature::tanh_sinh<double> ts;
  double re = 0.0, im = 0.0;
  for (const auto& i : a.intervals()) {
    re += ts.integrate([&](double x) { return std::cos(u * x); }, i.lo, i.hi);
    im -= ts.integrate([&](double x) { return std::sin(u * x); }, i.lo, i.hi);
  }
  return {re, im};
}

// Si(x) by Gauss-Kronrod over half periods.
double sine_integral(double x) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; };
  double s = 0.0;
  for (double a = 0.0; a < x; a += pi) s += gauss_kronrod<double, 31>::integrate(f, a, std::min(x, a + pi), 0, 0);
  return s;
}

// T(rho) for [-1/2,1/2]: 8 int_rho^inf sin^2(u/2)/u^2 du
//   = 4/rho - 4 (cos(rho)/rho - (pi/2 - Si(rho))).
double interval_tail_oracle(double rho) {
  return 4.0 / rho - 4.0 * (std::cos(rho) / rho - (pi / 2 - sine_integral(rho)));
}

}  // namespace

TEST_CASE("chi_hat_sq of an interval") {
  const CompositeSet a = CompositeSet::interval(-0.5, 0.5);
  CHECK(chi_hat_sq(a, 0.0) == 1.0);
  for (double u : {1e-9, 1e-3, 0.5, 1.0, 7.3, 100.0, 12345.6}) {
    const double expect = 4.0 * std::pow(std::sin(u / 2), 2) / (u * u);
    CHECK(chi_hat_sq(a, u) == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(chi_hat_sq(CompositeSet::interval(0, 3), 0.0) == doctest::Approx(9.0));
}

TEST_CASE("transform of interval unions matches quadrature") {
  const IntervalUnion two({{-1.3, -0.2}, {0.4, 2.1}});
  const SetTransform t(two);
  for (double u : {0.3, 1.7, 4.0, 11.0, -6.5}) {
    const auto q = quadrature_transform(two, u);
    CHECK(std::abs(t(u) - q) <= 1e-10);
  }
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const IntervalUnion a = random_union(rng);
    const SetTransform ta(a);
    for (double u : {0.7, 3.3, 9.1}) CHECK(std::abs(ta(u) - quadrature_transform(a, u)) <= 1e-10);
    for (double u : {0.2, 5.0, 80.0}) CHECK(chi_hat_sq(a, u) == doctest::Approx(chi_hat_sq(a, -u)).epsilon(1e-13));
  }
}

TEST_CASE("self-similar cantor transform equals the interval sum") {
  for (double beta : {0.3, 0.5, 0.7}) {
    const CantorParams p = cantor_params_from_beta(beta, 5);
    const CompositeSet fast = cantor_composite(p);
    const CompositeSet slow(build_cantor_set(p));
    REQUIRE_FALSE(slow.fractal());
    const SetTransform tf(fast), ts(slow);
    for (double u : {0.0, 0.1, 1.0, 13.0, 250.0, 4000.0}) {
      const auto a = tf(u), b = ts(u);
      CHECK(std::abs(a - b) <= 1e-11 * std::max(1.0, std::abs(b)));
    }
  }
}

TEST_CASE("parseval over random unions") {
  // Beyond rho the mean of |chi_hat|^2 is (number of endpoints)/u^2, so
  // int_{|u| > rho} ~ 2 * 2K / rho; the oscillating cross terms are O(rho^-2).
  std::mt19937_64 rng(99);
  const double rho = 1e5;
  for (int trial = 0; trial < 20; ++trial) {
    const IntervalUnion a = random_union(rng);
    const double total = 2.0 * head_integral(a, rho) + 4.0 * double(a.size()) / rho;
    CHECK(total == doctest::Approx(2.0 * pi * a.measure()).epsilon(1e-8));
  }
}

TEST_CASE("tail of an interval") {
  const CompositeSet a = CompositeSet::interval(-0.5, 0.5);
  CHECK(tail_integral(a, 0.0) == doctest::Approx(2 * pi));
  for (double rho : {1.0, 10.0, 37.5, 100.0, 1000.0, 5000.0}) {
    const double t = tail_integral(a, rho);
    CHECK(t == doctest::Approx(interval_tail_oracle(rho)).epsilon(1e-7));
    if (rho >= 10) {
      CHECK(rho * t >= 3.0);
      CHECK(rho * t <= 5.0);
    }
  }
}

TEST_CASE("tail is nonincreasing") {
  const CantorParams p = cantor_params_from_beta(0.5);
  for (const CompositeSet& a : {CompositeSet::interval(0, 1), cantor_composite(p),
                                CompositeSet(IntervalUnion({{0, 1}, {1.5, 1.7}}))}) {
    const TailProfile prof = fit_tail_exponent(a, {1.0, 1000.0}, 40);
    for (std::size_t i = 1; i < prof.tail_values.size(); ++i)
      CHECK(prof.tail_values[i] <= prof.tail_values[i - 1]);
  }
}

TEST_CASE("tail exponents") {
  const TailProfile unit = fit_tail_exponent(CompositeSet::interval(-0.5, 0.5), {10, 1e4}, 49);
  CHECK(unit.fitted_exponent == doctest::Approx(-1.0).epsilon(0.1));
  CHECK(unit.rho_grid.front() == 10.0);
  CHECK(unit.rho_grid.back() == 1e4);

  const CantorParams p = cantor_params_from_beta(0.5);
  const TailProfile c = fit_tail_exponent(cantor_composite(p), {10, 1e4}, 49);
  CHECK(std::abs(c.fitted_exponent + 0.5) <= 0.1);
  // T(rho) rho^0.5 stays in a bounded window.
  double lo = INFINITY, hi = 0.0;
  for (std::size_t i = 0; i < c.rho_grid.size(); ++i) {
    const double r = c.tail_values[i] * std::sqrt(c.rho_grid[i]);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(hi / lo < 5.0);

  // The rougher boundary wins.
  const CompositeSet mixed = disjoint_union(cantor_composite(p), CompositeSet::interval(2, 3));
  const TailProfile m = fit_tail_exponent(mixed, {10, 1e4}, 49);
  CHECK(std::abs(m.fitted_exponent + 0.5) <= 0.1);
}

TEST_CASE("modulus exponent bounds the tail exponent") {
  // A set whose modulus behaves like h^beta has tail exponent <= -beta + 0.15.
  for (double beta : {0.3, 0.5, 0.7}) {
    const CantorParams p = cantor_params_from_beta(beta);
    const TailProfile t = fit_tail_exponent(cantor_composite(p), {10, 1e4}, 49);
    CAPTURE(beta);
    CHECK(t.fitted_exponent <= -beta + 0.15);
  }
  CHECK(fit_tail_exponent(CompositeSet::interval(0, 2), {10, 1e4}, 49).fitted_exponent <= -1.0 + 0.15);
}

TEST_CASE("tail fit argument checks") {
  const CompositeSet a = CompositeSet::interval(0, 1);
  CHECK_THROWS_AS(fit_tail_exponent(a, {0.5, 10}, 10), DomainError);
  CHECK_THROWS_AS(fit_tail_exponent(a, {10, 5}, 10), DomainError);
  CHECK_THROWS_AS(fit_tail_exponent(a, {1, 10}, 3), DomainError);
  CHECK_THROWS_AS(fit_tail_exponent(CompositeSet(), {1, 10}, 10), DomainError);
}

TEST_CASE("tail profile csv") {
  const TailProfile t = fit_tail_exponent(CompositeSet::interval(0, 1), {10, 100}, 5);
  std::ostringstream os;
  write_csv(os, t);
  const std::string s = os.str();
  CHECK(s.rfind("# fitted_exponent=", 0) == 0);
  CHECK(s.find("\nrho,tail\n") != std::string::npos);
  CHECK(std::count(s.begin(), s.end(), '\n') == 7);
}

TEST_CASE("psi for step symbols") {
  const StepSymbol one({StepSymbol1D::indicator(CompositeSet::interval(-0.5, 0.5))});
  const StepSymbol two({StepSymbol1D({SymbolPiece{CompositeSet::interval(-0.5, 0.5), 2.0}})});
  for (double u : {0.4, 2.0, 9.0}) {
    const double expect = 4.0 * std::pow(std::sin(u / 2), 2) / (u * u);
    CHECK(psi_for_symbol(one, u) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(psi_for_symbol(two, u) == doctest::Approx(4.0 * expect).epsilon(1e-12));
  }

  // Two steps against quadrature of the symbol itself.
  const StepSymbol1D steps({SymbolPiece{CompositeSet::interval(-1.0, 0.0), 0.7},
                            SymbolPiece{CompositeSet::interval(0.0, 0.5), -1.3}});
  const StepSymbol s({steps});
  for (double u : {0.3, 2.2, 7.9}) {
    const auto f = 0.7 * quadrature_transform(IntervalUnion::single(-1, 0), u) -
                   1.3 * quadrature_transform(IntervalUnion::single(0, 0.5), u);
    CHECK(psi_for_symbol(s, u) == doctest::Approx(std::norm(f)).epsilon(1e-10));
  }

  // Products factorize.
  const StepSymbol prod({StepSymbol1D::indicator(CompositeSet::interval(-1, 1)),
                         StepSymbol1D::indicator(CompositeSet::interval(0, 2))});
  const double u[2] = {1.1, -0.4};
  CHECK(psi_for_symbol(prod, u) ==
        doctest::Approx(chi_hat_sq(CompositeSet::interval(-1, 1), 1.1) *
                        chi_hat_sq(CompositeSet::interval(0, 2), -0.4))
            .epsilon(1e-13));
  CHECK_THROWS_AS(psi_for_symbol(prod, 1.0), DimensionError);
}

TEST_CASE("closed-form tail agrees with the quadrature route") {
  for (double rho : {1.0, 10.0, 100.0, 1000.0}) {
    CHECK(tail_integral_closed_form(IntervalUnion::single(-0.5, 0.5), rho) ==
          doctest::Approx(interval_tail_oracle(rho)).epsilon(1e-9));
  }
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const IntervalUnion a = random_union(rng);
    for (double rho : {0.5, 3.0, 40.0, 700.0})
      CHECK(tail_integral_closed_form(a, rho) == doctest::Approx(tail_integral(a, rho)).epsilon(1e-7));
  }
  // Shallow cantor set, 15 intervals.
  const CompositeSet c = cantor_composite(cantor_params_from_beta(0.5, 1));
  for (double rho : {5.0, 50.0, 500.0})
    CHECK(tail_integral_closed_form(c.materialize(), rho) == doctest::Approx(tail_integral(c, rho)).epsilon(1e-7));
  CHECK_THROWS_AS(tail_integral_closed_form(IntervalUnion::single(0, 1), 0.0), DomainError);
}

TEST_CASE("generator-form cantor tail matches the materialized set") {
  for (const CantorParams& p : {cantor_params_from_beta(0.5, 1), cantor_params_from_beta(0.9, 0),
                                cantor_params_from_beta(0.3, 1)}) {
    REQUIRE(cantor_interval_count(p) <= kClosedFormTailIntervals);
    const IntervalUnion u = build_cantor_set(p);
    for (double rho : {2.0, 20.0, 300.0})
      CHECK(cantor_tail_closed_form(p, rho) == doctest::Approx(tail_integral_closed_form(u, rho)).epsilon(1e-9));
  }
  // Quadrature route as an independent check where the hull is moderate.
  const CantorParams p = cantor_params_from_beta(0.5, 1);
  CHECK(cantor_tail_closed_form(p, 30.0) == doctest::Approx(tail_integral(cantor_composite(p), 30.0)).epsilon(1e-7));
  CHECK_THROWS_AS(cantor_tail_closed_form(cantor_params_from_beta(0.5), 10.0), UnsupportedError);
}

TEST_CASE("near-regular set: tail exponent close to -1") {
  // Hull of order 1e60: only the generator form reaches it.
  const TailProfile t = fit_tail_exponent(cantor_params_from_beta(0.99), {10, 1e4}, 49);
  CHECK(std::abs(t.fitted_exponent + 0.99) <= 0.1);
  // Three intervals, six endpoints: rho T -> 12.
  for (std::size_t i = 0; i < t.rho_grid.size(); ++i)
    CHECK(t.tail_values[i] * t.rho_grid[i] == doctest::Approx(12.0).epsilon(0.05));

  // Both overloads agree where both apply.
  const CantorParams p = cantor_params_from_beta(0.5);
  CHECK(fit_tail_exponent(p, {10, 100}, 5).fitted_exponent ==
        doctest::Approx(fit_tail_exponent(cantor_composite(p), {10, 100}, 5).fitted_exponent));
}

TEST_CASE("panel quadrature on narrow panels") {
  // A relative noise of 1e-15 in f must not stall bisection on tiny panels.
  auto f = [](double t) { return std::cos(t) * (1.0 + 1e-15 * std::sin(1e12 * t)); };
  const QuadratureOptions opt;
  auto floor = [](double w, double) { return 1e-14 * w; };
  for (double w : {1.0, 1e-3, 1e-9}) {
    const double v = panel_quadrature(f, 0.6, 0.6 + w, floor, opt);
    CHECK(v == doctest::Approx(std::sin(0.6 + w) - std::sin(0.6)).epsilon(1e-6));
  }
}
