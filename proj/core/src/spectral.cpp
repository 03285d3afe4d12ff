#include "szego/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <ostream>

#include <lapacke.h>

#include "szego/error.hpp"

namespace szego {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Neumaier {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

void check_info(lapack_int info, const char* who) {
  if (info < 0) throw ConsistencyError(std::string(who) + ": illegal argument " + std::to_string(-info));
  if (info > 0)
    throw NumericalError(std::string(who) + ": eigensolver failed to converge (" +
                         std::to_string(info) + " off-diagonal elements)");
}

}  // namespace

std::vector<double> eigenvalues(const HermitianMatrix& m) {
  const auto n = lapack_int(m.n);
  std::vector<double> w(m.n);
  if (m.n == 0) return w;
  // Row-major storage of a Hermitian M is column-major storage of conj(M),
  // which has the same spectrum, so no transpose is needed.
  if (m.is_complex) {
    std::vector<std::complex<double>> a(m.cx);
    check_info(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, reinterpret_cast<lapack_complex_double*>(a.data()), n, w.data()), "zheevd");
  } else {
    std::vector<double> a(m.re);
    check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data()), "dsyevd");
  }
  return w;
}

std::pair<std::vector<double>, HermitianMatrix> eigensystem(const HermitianMatrix& m) {
  const auto n = lapack_int(m.n);
  std::vector<double> w(m.n);
  HermitianMatrix v = m;
  if (m.n == 0) return {w, v};
  if (m.is_complex)
    check_info(LAPACKE_zheevd(LAPACK_ROW_MAJOR, 'V', 'L', n, reinterpret_cast<lapack_complex_double*>(v.cx.data()), n, w.data()), "zheevd");
  else
    check_info(LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'V', 'L', n, v.re.data(), n, w.data()), "dsyevd");
  return {w, v};
}

SpectralResult clamp_projection_spectrum(std::vector<double> raw, double tol) {
  SpectralResult s;
  std::sort(raw.begin(), raw.end());
  s.raw = raw;
  s.projection = true;
  s.n = raw.size();
  for (double& e : raw) {
    const double out = e < 0.0 ? -e : (e > 1.0 ? e - 1.0 : 0.0);
    if (!(out <= tol))
      throw SpectrumError("eigenvalue " + std::to_string(e) + " lies outside [0,1] by more than " +
                          std::to_string(tol));
    if (out > 0.0) {
      ++s.clamp.count;
      s.clamp.max_excursion = std::max(s.clamp.max_excursion, out);
      e = e < 0.0 ? 0.0 : 1.0;
    }
  }
  s.eigenvalues = std::move(raw);
  return s;
}

SpectralResult eigenvalues(const OverlapOperator& op, EigenRoute route) {
  if (route == EigenRoute::automatic)
    route = (op.dimension() > 1 || !op.has_dense()) ? EigenRoute::factors : EigenRoute::dense;
  if (route == EigenRoute::factors && op.factors().empty()) route = EigenRoute::dense;

  std::vector<double> raw;
  if (route == EigenRoute::dense) {
    raw = eigenvalues(op.matrix());
  } else {
    raw = {1.0};
    for (const auto& f : op.factors()) {
      const auto ef = eigenvalues(f);
      std::vector<double> next;
      next.reserve(raw.size() * ef.size());
      for (double a : raw)
        for (double b : ef) next.push_back(a * b);
      raw = std::move(next);
    }
    std::sort(raw.begin(), raw.end());
  }

  SpectralResult s;
  const bool projection = op.symbol().dimension() > 0 && op.symbol().is_projection();
  if (projection) {
    s = clamp_projection_spectrum(std::move(raw));
  } else {
    s.raw = raw;
    s.eigenvalues = std::move(raw);
    s.n = s.raw.size();
  }
  s.lambda = op.lambda();
  s.mode = op.mode();
  return s;
}

// ---------------------------------------------------------------------------

double binary_entropy(double t) {
  auto term = [](double x) { return x < 1e-300 ? 0.0 : -x * std::log2(x); };
  if (t < 0.0 || t > 1.0) throw DomainError("binary entropy: argument outside [0,1]");
  return term(t) + term(1.0 - t);
}

namespace {
void require_projection(const SpectralResult& s, const char* who) {
  if (!s.projection) throw SpectrumError(std::string(who) + ": needs a clamped projection spectrum");
}
}  // namespace

double entropy(const SpectralResult& s) {
  require_projection(s, "entropy");
  Neumaier sum;
  for (double e : s.eigenvalues) sum.add(binary_entropy(e));
  return sum.value();
}

double variance(const SpectralResult& s) {
  require_projection(s, "variance");
  Neumaier sum;
  for (double e : s.eigenvalues) sum.add(e * (1.0 - e));
  return sum.value();
}

// ---------------------------------------------------------------------------

Functional Functional::power(int m) {
  if (m < 0) throw DomainError("power functional: exponent must be >= 0");
  Functional f;
  f.kind_ = Kind::power;
  f.m_ = m;
  return f;
}

Functional Functional::entropy_h() {
  Functional f;
  f.kind_ = Kind::entropy_h;
  return f;
}

Functional Functional::table(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) throw DomainError("table functional: need at least 2 points");
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i].first > points[i - 1].first))
      throw DomainError("table functional: nodes must be strictly increasing");
  Functional f;
  f.kind_ = Kind::table;
  f.table_ = std::move(points);
  return f;
}

std::string Functional::name() const {
  switch (kind_) {
    case Kind::power: return "power(" + std::to_string(m_) + ")";
    case Kind::entropy_h: return "entropy_h";
    case Kind::table: return "table(" + std::to_string(table_.size()) + ")";
  }
  return "?";
}

double Functional::operator()(double t) const {
  switch (kind_) {
    case Kind::power: return m_ == 0 ? 1.0 : std::pow(t, m_);
    case Kind::entropy_h: return binary_entropy(t);
    case Kind::table: {
      if (t < table_.front().first || t > table_.back().first)
        throw DomainError("table functional undefined at " + std::to_string(t));
      auto it = std::upper_bound(table_.begin(), table_.end(), t,
                                 [](double v, const auto& p) { return v < p.first; });
      if (it == table_.end()) return table_.back().second;
      const auto& [x1, y1] = *it;
      const auto& [x0, y0] = *(it - 1);
      return y0 + (y1 - y0) * (t - x0) / (x1 - x0);
    }
  }
  return 0.0;
}

double trace_f(const SpectralResult& s, const Functional& f) {
  Neumaier sum;
  for (double e : s.eigenvalues) sum.add(f(e));
  return sum.value();
}

// ---------------------------------------------------------------------------

double weyl_term(const RegionSpec& region, const StepSymbol& symbol, double lambda,
                 const Functional& f, Mode mode) {
  const std::size_t d = region.dimension();
  if (symbol.dimension() != d) throw DimensionError("weyl_term: region and symbol dimensions differ");
  const double f0 = f(0.0);
  const double cells = symbol.integrate([&](double v) { return f(v); });

  if (mode == Mode::continuum) {
    if (f0 != 0.0)
      throw IntegrabilityError("weyl_term: f(0) = " + std::to_string(f0) +
                               " is not integrable over the unbounded complement of the support");
    return std::pow(lambda / kTwoPi, double(d)) * region.measure() * cells;
  }

  double sites = 1.0, listed = 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    sites *= double(lattice_axis(region.factors[j].materialize(), lambda).nodes.size());
    double m = 0.0;
    for (const auto& p : symbol.factor(j).pieces()) m += p.cell.measure();
    listed *= m;
  }
  const double torus = std::pow(kTwoPi, double(d));
  return sites / torus * (cells + f0 * (torus - listed));
}

double weyl_term(const OverlapOperator& op, const Functional& f) {
  return weyl_term(op.region(), op.symbol(), op.lambda(), f, op.mode());
}

TraceReport szego_remainder(const OverlapOperator& op, const SpectralResult& s, const Functional& f) {
  TraceReport r;
  r.trace_f = trace_f(s, f);
  r.weyl_term = weyl_term(op, f);
  r.remainder = r.trace_f - r.weyl_term;
  r.f_descriptor = f.name();
  return r;
}

TraceReport szego_remainder(const OverlapOperator& op, const Functional& f) {
  return szego_remainder(op, eigenvalues(op), f);
}

void write_csv_header(std::ostream& os) { os << "lambda,n,S,variance,trace_f,weyl,remainder\n"; }

void write_csv_row(std::ostream& os, const SpectralResult& s, const TraceReport& r) {
  const auto prec = os.precision(17);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  os << s.lambda << "," << s.n << "," << (s.projection ? entropy(s) : nan) << ","
     << (s.projection ? variance(s) : nan) << "," << r.trace_f << "," << r.weyl_term << ","
     << r.remainder << "\n";
  os.precision(prec);
}

}  // namespace szego
