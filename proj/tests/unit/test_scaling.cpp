#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "szego/error.hpp"
#include "szego/scaling.hpp"

using namespace szego;
using std::numbers::pi;

namespace {

Experiment half_filling(std::vector<double> lambdas) {
  Experiment e;
  e.omega = RegionSpec({CompositeSet::interval(0, 1)}, Mode::lattice);
  e.symbol = StepSymbol({StepSymbol1D::indicator(CompositeSet::interval(-pi / 2, pi / 2))});
  e.mode = Mode::lattice;
  e.lambdas = std::move(lambdas);
  return e;
}

Experiment cube_lattice(std::size_t d, std::vector<double> lambdas) {
  Experiment e;
  e.omega = RegionSpec::cube(d, 0, 1, Mode::lattice);
  e.symbol = StepSymbol::indicator(RegionSpec::cube(d, -pi / 2, pi / 2));
  e.mode = Mode::lattice;
  e.lambdas = std::move(lambdas);
  return e;
}

}  // namespace

TEST_CASE("dyadic grids") {
  CHECK(dyadic_grid(16, 128) == std::vector<double>{16, 32, 64, 128});
  const auto g = dyadic_grid(8, 32, 2);
  REQUIRE(g.size() == 5);
  CHECK(g[1] == doctest::Approx(8 * std::sqrt(2.0)));
  CHECK(g.back() == doctest::Approx(32));
  CHECK_THROWS_AS(dyadic_grid(0, 8), DomainError);
  CHECK_THROWS_AS(dyadic_grid(8, 4), DomainError);
}

TEST_CASE("power-log fit recovers models in its span") {
  const auto lam = dyadic_grid(4, 4096);
  std::vector<double> y;
  for (double l : lam) y.push_back(2 * l * std::log2(l) + 3 * l);
  const ScalingFit fixed = fit_power_log(lam, y, 1.0);
  CHECK(fixed.coeff_a == doctest::Approx(2).epsilon(1e-9));
  CHECK(fixed.coeff_b == doctest::Approx(3).epsilon(1e-9));
  CHECK(fixed.rms_residual < 1e-9);
  CHECK(fixed.model == FitModel::power_log);

  const ScalingFit free = fit_power_log(lam, y);
  CHECK(free.exponent == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(free.coeff_a == doctest::Approx(2).epsilon(1e-8));
  CHECK(free.coeff_b == doctest::Approx(3).epsilon(1e-8));

  std::vector<double> root;
  for (double l : lam) root.push_back(std::sqrt(l));
  const ScalingFit r = fit_power_log(lam, root);
  CHECK(std::abs(r.exponent - 0.5) <= 1e-6);
  CHECK(std::abs(r.coeff_a) <= 1e-6);
  CHECK(r.coeff_b == doctest::Approx(1.0).epsilon(1e-6));

  // Random members of the model class.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> p(-0.5, 2.0), c(0.5, 4.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double pp = p(rng), a = c(rng), b = c(rng);
    std::vector<double> yy;
    for (double l : lam) yy.push_back(std::pow(l, pp) * (a * std::log2(l) + b));
    const ScalingFit f = fit_power_log(lam, yy);
    CAPTURE(pp);
    CHECK(f.exponent == doctest::Approx(pp).epsilon(1e-8).scale(1.0));
    CHECK(f.coeff_a == doctest::Approx(a).epsilon(1e-8));
    CHECK(f.coeff_b == doctest::Approx(b).epsilon(1e-8));
  }
}

TEST_CASE("fit preconditions") {
  const std::vector<double> l{2, 4, 8}, y{1, 2, 3};
  CHECK_THROWS_AS(fit_power_log(l, y), FitError);
  CHECK_THROWS_AS(fit_power_log(std::vector<double>{2, 4}, std::vector<double>{1, 2}, 0.0), FitError);
  CHECK_THROWS_AS(fit_pure_power(std::vector<double>{2, 4, 8}, std::vector<double>{1, -2, 3}), FitError);
  CHECK_THROWS_AS(fit_power_log(std::vector<double>{2, 4, 4, 8}, std::vector<double>{1, 2, 3, 4}), FitError);
}

TEST_CASE("pure power fit and local exponents") {
  const auto lam = dyadic_grid(2, 1024);
  std::vector<double> y;
  for (double l : lam) y.push_back(5 * std::pow(l, 0.7));
  const ScalingFit f = fit_pure_power(lam, y);
  CHECK(f.exponent == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(f.coeff_b == doctest::Approx(5).epsilon(1e-12));
  CHECK(f.exponent_half_range < 1e-12);
  for (double e : local_exponents(lam, y)) CHECK(e == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(successive_differences(std::vector<double>{1, 4, 9}) == std::vector<double>{3, 5});
}

TEST_CASE("widom coefficient") {
  const WidomCoefficient w1 =
      widom_coefficient(RegionSpec({CompositeSet::interval(0, 1)}), RegionSpec({CompositeSet::interval(-0.5, 0.5)}));
  CHECK(w1.value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(w1.face_pairs.size() == 4);
  double sum = 0.0;
  for (const auto& f : w1.face_pairs) sum += f.contribution;
  CHECK(sum == w1.value);

  const WidomCoefficient w2 = widom_coefficient(RegionSpec::cube(2, 0, 1), RegionSpec::cube(2, 0, 1));
  CHECK(w2.value == doctest::Approx(1.0 / (3.0 * pi)).epsilon(1e-15));
  CHECK(w2.face_pairs.size() == 8);

  // Translation and dilation of Gamma in d=1 leave the count of endpoints alone.
  const double scaled =
      widom_coefficient(RegionSpec({CompositeSet::interval(3, 4)}), RegionSpec({CompositeSet::interval(-7, 5)})).value;
  CHECK(scaled == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  // Two intervals: 4 endpoints against 2.
  CHECK(widom_coefficient(RegionSpec({CompositeSet(IntervalUnion({{0, 1}, {2, 3}}))}),
                          RegionSpec({CompositeSet::interval(-1, 1)}))
            .value == doctest::Approx(8.0 / 12.0));

  CHECK_THROWS_AS(widom_coefficient(RegionSpec({cantor_composite(cantor_params_from_beta(0.5))}),
                                    RegionSpec({CompositeSet::interval(0, 1)})),
                  UnsupportedError);
  CHECK_THROWS_AS(widom_coefficient(RegionSpec::cube(2, 0, 1), RegionSpec::cube(1, 0, 1)), DimensionError);
}

TEST_CASE("sweep basics") {
  Experiment e = half_filling({64, 16, 32});
  e.parallelism = 3;
  const SweepResult r = sweep(e);
  REQUIRE(r.points.size() == 3);
  CHECK(r.lambdas() == std::vector<double>{16, 32, 64});
  const auto s = r.values(Quantity::entropy);
  CHECK(s[0] < s[1]);
  CHECK(s[1] < s[2]);
  for (const auto& p : r.points) {
    CHECK(p.ok);
    CHECK(p.route == "eigen");
    CHECK(p.min_entropy_gap >= 0.0);
  }

  // Deterministic regardless of the worker count.
  Experiment serial = e;
  serial.parallelism = 1;
  CHECK(sweep(serial).values(Quantity::entropy) == s);

  CHECK(sweep(half_filling({128})).points.size() == 1);

  Experiment empty = half_filling({16, 32});
  empty.symbol = StepSymbol({StepSymbol1D()});
  for (double v : sweep(empty).values(Quantity::entropy)) CHECK(v == 0.0);

  CHECK_THROWS_AS(sweep(half_filling({1.0, 16})), DomainError);
  CHECK_THROWS_AS(sweep(half_filling({16, 16})), DomainError);
  CHECK_THROWS_AS(sweep(half_filling({})), DomainError);
}

TEST_CASE("sweep failure accounting") {
  // Budget allows lambda <= 64 only: 2 of 5 fail, which aborts.
  Experiment e = half_filling({16, 32, 64, 128, 256});
  e.assemble.memory_budget_entries = 64.0 * 64.0;
  CHECK_THROWS_AS(sweep(e), NumericalError);
  // 1 of 5 is tolerated and recorded.
  e.lambdas = {8, 16, 32, 64, 128};
  const SweepResult r = sweep(e);
  CHECK(r.failures == 1);
  CHECK_FALSE(r.points.back().ok);
  CHECK(r.points.back().error.find("memory budget") != std::string::npos);
  CHECK(r.lambdas().size() == 4);
}

TEST_CASE("variance-only routes agree with the spectrum") {
  Experiment e = half_filling({32, 64});
  const auto full = sweep(e).values(Quantity::variance);
  e.need_spectrum = false;
  const SweepResult t = sweep(e);
  CHECK(t.points[0].route == "toeplitz");
  const auto fast = t.values(Quantity::variance);
  for (std::size_t i = 0; i < 2; ++i) CHECK(fast[i] == doctest::Approx(full[i]).epsilon(1e-10));

  Experiment sq = cube_lattice(2, {8, 12});
  const auto sq_full = sweep(sq).values(Quantity::variance);
  sq.need_spectrum = false;
  const SweepResult tr = sweep(sq);
  CHECK(tr.points[0].route == "trace-identity");
  const auto sq_fast = tr.values(Quantity::variance);
  for (std::size_t i = 0; i < 2; ++i) CHECK(sq_fast[i] == doctest::Approx(sq_full[i]).epsilon(1e-10));
}

TEST_CASE("lattice entropy coefficient") {
  const SweepResult r = sweep(half_filling(dyadic_grid(64, 1024)));
  const auto lam = r.lambdas();
  const auto s = r.values(Quantity::entropy);
  const ScalingFit f = fit_power_log(lam, s, 0.0);
  CHECK(std::abs(f.coeff_a - 1.0 / 3.0) <= 0.02);
  const auto diffs = successive_differences(s);
  CHECK(std::abs(diffs.back() - 1.0 / 3.0) <= 0.02);
}

TEST_CASE("sandwich report") {
  // d = 1 against itself: upper bound tight, lower strict.
  const SweepResult one = sweep(half_filling({16, 32}));
  const SandwichReport r1 = check_sandwich(one, one, 1);
  CHECK(r1.pass);
  for (const auto& row : r1.rows) CHECK(row.ratio_literal == doctest::Approx(1.0));

  const SweepResult two = sweep(cube_lattice(2, {8, 16}));
  const SandwichReport r2 = check_sandwich(two, one.lambdas() == two.lambdas() ? one : sweep(half_filling({8, 16})), 2);
  CHECK(r2.rows.size() == 2);
  CHECK(r2.rows[0].gated);
  CHECK_FALSE(r2.rows[1].gated);
  CHECK(r2.rows[1].prefactor_normalized == doctest::Approx(8.0));
  CHECK(r2.rows[1].prefactor_literal == doctest::Approx(16.0 / (2 * pi)));
  CHECK(r2.pass == r2.rows[1].pass_normalized);

  Experiment empty = half_filling({16, 32});
  empty.symbol = StepSymbol({StepSymbol1D()});
  Experiment empty2 = cube_lattice(2, {16, 32});
  empty2.symbol = StepSymbol({StepSymbol1D(), StepSymbol1D()});
  CHECK(check_sandwich(sweep(empty2), sweep(empty), 2).pass);

  CHECK_THROWS_AS(check_sandwich(two, one, 2), DimensionError);
}

TEST_CASE("entropy-variance report") {
  const SweepResult r = sweep(half_filling(dyadic_grid(4, 256)));
  const EntropyVarianceReport rep = check_entropy_variance(r, r);
  CHECK(rep.lower_bound_holds);
  CHECK(rep.rows.size() == 7);
  CHECK(rep.fitted_c > 0.0);
  for (const auto& row : rep.rows) CHECK(row.entropy <= rep.fitted_c * std::log2(row.lambda) * row.variance * (1 + 1e-12));

  // Spectrum {0.5} is the equality case; {0, 1} gives 0 >= 0.
  auto point = [](double lambda, const std::vector<double>& eig) {
    const SpectralResult sp = clamp_projection_spectrum(eig);
    SweepPoint p;
    p.lambda = lambda;
    p.ok = true;
    p.entropy = entropy(sp);
    p.variance = variance(sp);
    return p;
  };
  SweepResult manual;
  manual.points = {point(4, {0.5}), point(8, {0.0, 1.0})};
  const auto eq = check_entropy_variance(manual, manual);
  CHECK(eq.lower_bound_holds);
  CHECK(eq.rows[0].entropy == 4 * eq.rows[0].variance);
  CHECK(eq.rows[1].entropy == 0.0);
}

TEST_CASE("fractal gamma variance exponent") {
  // Omega = [0,1], Gamma a Cantor set: variance ~ lambda^{1-beta}.
  Experiment e;
  e.omega = RegionSpec({CompositeSet::interval(0, 1)});
  e.symbol = StepSymbol({StepSymbol1D::indicator(cantor_composite(cantor_params_from_beta(0.5)))});
  e.mode = Mode::continuum;
  e.need_spectrum = false;
  e.lambdas = dyadic_grid(256, 2048);
  const SweepResult r = sweep(e);
  const ScalingFit f = fit_pure_power(r.lambdas(), r.values(Quantity::variance));
  CHECK(std::abs(f.exponent - 0.5) <= 0.1);
}
