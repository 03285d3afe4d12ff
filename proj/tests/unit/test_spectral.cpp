#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "szego/error.hpp"
#include "szego/spectral.hpp"

using namespace szego;
using std::numbers::pi;

namespace {

HermitianMatrix diag(std::initializer_list<double> v) {
  HermitianMatrix m = HermitianMatrix::real(v.size());
  std::size_t i = 0;
  for (double x : v) {
    m.set(i, i, x);
    ++i;
  }
  return m;
}

HermitianMatrix random_hermitian(std::size_t n, bool complex, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  HermitianMatrix m = complex ? HermitianMatrix::complex(n) : HermitianMatrix::real(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const std::complex<double> v(g(rng), complex && i != j ? g(rng) : 0.0);
      m.set(i, j, v);
      m.set(j, i, std::conj(v));
    }
  return m;
}

OverlapOperator half_filling(double lambda) {
  return assemble(RegionSpec({CompositeSet::interval(0, 1)}, Mode::lattice),
                  StepSymbol({StepSymbol1D::indicator(CompositeSet::interval(-pi / 2, pi / 2))}),
                  lambda, Mode::lattice);
}

OverlapOperator unit_continuum(double lambda) {
  return assemble(RegionSpec({CompositeSet::interval(0, 1)}),
                  StepSymbol({StepSymbol1D::indicator(CompositeSet::interval(-1, 1))}), lambda,
                  Mode::continuum);
}

}  // namespace

TEST_CASE("small spectra") {
  CHECK(eigenvalues(diag({0.5})) == std::vector<double>{0.5});
  CHECK(eigenvalues(diag({3.0, -1.0})) == std::vector<double>{-1.0, 3.0});
  const auto s = clamp_projection_spectrum({0.5});
  CHECK(entropy(s) == 1.0);
  CHECK(variance(s) == 0.25);
  CHECK(trace_f(s, Functional::power(2)) == 0.25);
  const auto pure = clamp_projection_spectrum({0, 1, 1, 0});
  CHECK(entropy(pure) == 0.0);
  CHECK(variance(pure) == 0.0);
  CHECK(pure.eigenvalues == std::vector<double>{0, 0, 1, 1});
}

TEST_CASE("trace identities on random matrices") {
  std::mt19937_64 rng(17);
  for (bool complex : {false, true}) {
    const HermitianMatrix m = random_hermitian(50, complex, rng);
    const auto e = eigenvalues(m);
    CHECK(std::is_sorted(e.begin(), e.end()));
    double s1 = 0.0, s2 = 0.0;
    for (double x : e) {
      s1 += x;
      s2 += x * x;
    }
    CHECK(std::abs(s1 - m.trace()) <= 1e-10 * std::sqrt(m.frobenius_sq()));
    CHECK(s2 == doctest::Approx(m.frobenius_sq()).epsilon(1e-10));
  }
}

TEST_CASE("eigenpair residuals") {
  std::mt19937_64 rng(23);
  for (bool complex : {false, true}) {
    const HermitianMatrix m = random_hermitian(40, complex, rng);
    const auto [w, v] = eigensystem(m);
    const double norm = std::sqrt(m.frobenius_sq());
    for (std::size_t k : {0u, 7u, 19u, 31u, 39u}) {
      double r = 0.0;
      for (std::size_t i = 0; i < m.n; ++i) {
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < m.n; ++j) acc += m.at(i, j) * v.at(j, k);
        r += std::norm(acc - w[k] * v.at(i, k));
      }
      CHECK(std::sqrt(r) <= 1e-10 * norm);
    }
  }
}

TEST_CASE("clamping") {
  const auto s = clamp_projection_spectrum({-5e-9, 0.3, 1.0 + 2e-9});
  CHECK(s.clamp.count == 2);
  CHECK(s.clamp.max_excursion == doctest::Approx(5e-9));
  CHECK(s.eigenvalues == std::vector<double>{0.0, 0.3, 1.0});
  CHECK(s.raw.front() == -5e-9);
  CHECK_THROWS_AS(clamp_projection_spectrum({-1e-7, 0.5}), SpectrumError);
  CHECK_THROWS_AS(clamp_projection_spectrum({0.5, 1.0 + 1e-6}), SpectrumError);
  SpectralResult raw;
  raw.eigenvalues = {0.2};
  CHECK_THROWS_AS(entropy(raw), SpectrumError);
}

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(1e-320) == 0.0);
  CHECK(binary_entropy(0.25) == doctest::Approx(0.8112781244591328).epsilon(1e-15));
  CHECK_THROWS_AS(binary_entropy(1.5), DomainError);
  // h(t) >= 4t(1-t) pointwise.
  for (int k = 0; k <= 1000; ++k) {
    const double t = k / 1000.0;
    CHECK(binary_entropy(t) >= 4 * t * (1 - t) - 1e-15);
  }
}

TEST_CASE("functionals") {
  const auto s = clamp_projection_spectrum({0.0, 0.1, 0.5, 0.9, 1.0});
  CHECK(trace_f(s, Functional::power(1)) == doctest::Approx(2.5));
  CHECK(trace_f(s, Functional::power(0)) == 5.0);
  CHECK(trace_f(s, Functional::entropy_h()) == entropy(s));
  const auto tab = Functional::table({{0.0, 0.0}, {0.5, 1.0}, {1.0, 0.0}});
  CHECK(tab(0.25) == doctest::Approx(0.5));
  CHECK(tab(1.0) == 0.0);
  CHECK(trace_f(s, tab) == doctest::Approx(0.2 + 1.0 + 0.2));
  CHECK_THROWS_AS(Functional::table({{0.0, 1.0}, {0.5, 2.0}})(0.7), DomainError);
  CHECK_THROWS_AS(Functional::table({{0.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(Functional::table({{0.5, 1.0}, {0.5, 2.0}}), DomainError);
  CHECK_THROWS_AS(Functional::power(-1), DomainError);
  CHECK(Functional::power(2).name() == "power(2)");
}

TEST_CASE("weyl term") {
  const RegionSpec unit({CompositeSet::interval(0, 1)});
  const StepSymbol g({StepSymbol1D::indicator(CompositeSet::interval(-1, 1))});
  CHECK(weyl_term(unit, g, 2 * pi, Functional::power(2), Mode::continuum) == doctest::Approx(2.0));
  CHECK(weyl_term(unit, g, 17.0, Functional::entropy_h(), Mode::continuum) == 0.0);
  CHECK_THROWS_AS(weyl_term(unit, g, 8.0, Functional::power(0), Mode::continuum), IntegrabilityError);

  const auto op = half_filling(64);
  CHECK(weyl_term(op, Functional::power(1)) == doctest::Approx(op.matrix().trace()).epsilon(1e-14));
  // On the torus f(0) counts over the complement of Gamma.
  CHECK(weyl_term(op, Functional::power(0)) == doctest::Approx(64.0).epsilon(1e-14));
}

TEST_CASE("szego remainder identities") {
  for (const auto& op : {half_filling(64), unit_continuum(24), half_filling(101.5)}) {
    const auto s = eigenvalues(op);
    const auto sq = szego_remainder(op, s, Functional::power(2));
    CHECK(sq.remainder == sq.trace_f - sq.weyl_term);
    CHECK(sq.remainder == doctest::Approx(-variance(s)).epsilon(1e-10));
    const auto h = szego_remainder(op, s, Functional::entropy_h());
    CHECK(h.weyl_term == 0.0);
    CHECK(h.remainder == entropy(s));
    CHECK(variance(s) == doctest::Approx(hs_cross_norm_direct(op)).epsilon(1e-10));
    CHECK(s.eigenvalues.size() == op.size());
    CHECK(entropy(s) >= 4 * variance(s));
  }
}

TEST_CASE("lattice entropy grows by a third of a bit per doubling") {
  const double s1 = entropy(eigenvalues(half_filling(256)));
  const double s2 = entropy(eigenvalues(half_filling(512)));
  CHECK(std::abs(s2 - s1 - 1.0 / 3.0) <= 0.02);
}

TEST_CASE("continuum variance over log lambda settles") {
  std::vector<double> r;
  for (double lambda : {16.0, 32.0, 64.0, 128.0}) r.push_back(variance(eigenvalues(unit_continuum(lambda))) / std::log2(lambda));
  for (double x : r) CHECK(x > 0.0);
  CHECK(std::abs(r[3] - r[2]) < std::abs(r[1] - r[0]));
}

TEST_CASE("product route agrees with dense") {
  const RegionSpec sq = RegionSpec::cube(2, 0, 1, Mode::lattice);
  const StepSymbol g = StepSymbol::indicator(RegionSpec::cube(2, -pi / 2, pi / 2));
  const auto op = assemble(sq, g, 12, Mode::lattice);
  const auto a = eigenvalues(op, EigenRoute::dense), b = eigenvalues(op, EigenRoute::factors);
  REQUIRE(a.eigenvalues.size() == b.eigenvalues.size());
  for (std::size_t i = 0; i < a.eigenvalues.size(); ++i)
    CHECK(a.eigenvalues[i] == doctest::Approx(b.eigenvalues[i]).epsilon(1e-10).scale(1.0));
  CHECK(entropy(a) == doctest::Approx(entropy(b)).epsilon(1e-9));
}

TEST_CASE("csv rows") {
  const auto op = half_filling(8);
  const auto s = eigenvalues(op);
  std::ostringstream os;
  write_csv_header(os);
  write_csv_row(os, s, szego_remainder(op, s, Functional::power(2)));
  const std::string out = os.str();
  CHECK(out.rfind("lambda,n,S,variance,trace_f,weyl,remainder\n", 0) == 0);
  CHECK(out.find("\n8,8,") != std::string::npos);
}
