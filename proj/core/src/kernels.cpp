#include "szego/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <thread>


#include "szego/error.hpp"

namespace szego {

namespace {

using cplx = std::complex<double>;
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

template <class F>
void parallel_rows(std::size_t n, unsigned threads, F&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, unsigned(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) body(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

// ---------------------------------------------------------------------------

HermitianMatrix HermitianMatrix::real(std::size_t n) {
  HermitianMatrix m;
  m.n = n;
  m.re.assign(n * n, 0.0);
  return m;
}

HermitianMatrix HermitianMatrix::complex(std::size_t n) {
  HermitianMatrix m;
  m.n = n;
  m.is_complex = true;
  m.cx.assign(n * n, cplx{});
  return m;
}

void HermitianMatrix::set(std::size_t i, std::size_t j, std::complex<double> v) {
  if (is_complex)
    cx[i * n + j] = v;
  else
    re[i * n + j] = v.real();
}

double HermitianMatrix::trace() const {
  Neumaier s;
  for (std::size_t i = 0; i < n; ++i) s.add(at(i, i).real());
  return s.value();
}

double HermitianMatrix::frobenius_sq() const {
  Neumaier s;
  if (is_complex)
    for (const auto& v : cx) s.add(std::norm(v));
  else
    for (double v : re) s.add(v * v);
  return s.value();
}

double HermitianMatrix::max_abs() const {
  double m = 0.0;
  if (is_complex)
    for (const auto& v : cx) m = std::max(m, std::abs(v));
  else
    for (double v : re) m = std::max(m, std::abs(v));
  return m;
}

double hermiticity_defect(const HermitianMatrix& m) {
  const double scale = m.max_abs();
  if (scale == 0.0) return 0.0;
  double d = 0.0;
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = i; j < m.n; ++j) d = std::max(d, std::abs(m.at(i, j) - std::conj(m.at(j, i))));
  return d / scale;
}

HermitianMatrix kronecker(const HermitianMatrix& a, const HermitianMatrix& b) {
  const std::size_t n = a.n * b.n;
  HermitianMatrix out = (a.is_complex || b.is_complex) ? HermitianMatrix::complex(n)
                                                       : HermitianMatrix::real(n);
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t j = 0; j < a.n; ++j) {
      const cplx aij = a.at(i, j);
      for (std::size_t k = 0; k < b.n; ++k)
        for (std::size_t l = 0; l < b.n; ++l)
          out.set(i * b.n + k, j * b.n + l, aij * b.at(k, l));
    }
  return out;
}

// ---------------------------------------------------------------------------

Kernel1D::Kernel1D(const StepSymbol1D& sigma, double lambda, Mode mode)
    : transform_(sigma), lambda_(lambda), mode_(mode) {}

std::complex<double> Kernel1D::operator()(double t) const {
  // int e^{i s xi} sigma(xi) dxi is the transform evaluated at -s.
  if (mode_ == Mode::lattice) return transform_(-t) / kTwoPi;
  return (lambda_ / kTwoPi) * transform_(-lambda_ * t);
}

std::complex<double> kernel_value(const StepSymbol& symbol, double lambda,
                                  std::span<const double> x, std::span<const double> y, Mode mode) {
  if (x.size() != symbol.dimension() || y.size() != symbol.dimension())
    throw DimensionError("kernel_value: point dimension does not match the symbol");
  cplx k{1.0, 0.0};
  for (std::size_t j = 0; j < x.size(); ++j) k *= Kernel1D(symbol.factor(j), lambda, mode)(x[j] - y[j]);
  return k;
}

// ---------------------------------------------------------------------------

Axis lattice_axis(const IntervalUnion& omega, double lambda) {
  Axis ax;
  auto first_at_or_above = [](double x) {
    return std::ceil(x - 1e-12 * std::max(1.0, std::abs(x)));
  };
  for (const auto& i : omega.intervals()) {
    const double a = first_at_or_above(lambda * i.lo);
    const double b = first_at_or_above(lambda * i.hi);
    for (double s = a; s < b; s += 1.0) {
      if (!ax.nodes.empty() && s <= ax.nodes.back()) continue;
      ax.nodes.push_back(s);
    }
  }
  ax.weights.assign(ax.nodes.size(), 1.0);
  ax.uniform = true;
  for (std::size_t k = 1; k < ax.nodes.size(); ++k)
    if (ax.nodes[k] != ax.nodes[k - 1] + 1.0) ax.uniform = false;
  return ax;
}

Axis nystrom_axis(const IntervalUnion& omega, double lambda, double xi_max,
                  int nodes_per_oscillation) {
  if (nodes_per_oscillation < 8)
    throw DomainError("nystrom: at least 8 nodes per kernel oscillation are required");
  Axis ax;
  // An empty symbol has a zero kernel; any grid will do.
  const double band = xi_max > 0.0 ? lambda * xi_max : 1.0;
  const double target = kTwoPi / (nodes_per_oscillation * band);
  for (const auto& i : omega.intervals()) {
    const auto m = std::size_t(std::max(1.0, std::ceil(i.length() / target - 1e-9)));
    const double h = i.length() / double(m);
    for (std::size_t k = 0; k < m; ++k) {
      ax.nodes.push_back(i.lo + (double(k) + 0.5) * h);
      ax.weights.push_back(h);
    }
  }
  ax.uniform = omega.size() == 1;
  return ax;
}

double bandwidth(const StepSymbol1D& sigma) {
  if (sigma.empty()) return 0.0;
  return 0.5 * (sigma.support_upper() - sigma.support_lower());
}

namespace {

void check_lattice_symbol(const StepSymbol1D& s) {
  if (s.empty()) return;
  const double tol = 1e-12;
  if (s.support_lower() < -std::numbers::pi - tol || s.support_upper() > std::numbers::pi + tol)
    throw DomainError("lattice symbol must be supported in [-pi, pi] (radians)");
}

HermitianMatrix assemble_factor(const Axis& ax, const StepSymbol1D& sigma, double lambda,
                                Mode mode, unsigned threads) {
  const std::size_t n = ax.nodes.size();
  const bool real = sigma.symmetric() || sigma.empty();
  HermitianMatrix m = real ? HermitianMatrix::real(n) : HermitianMatrix::complex(n);
  if (n == 0) return m;
  const Kernel1D k(sigma, lambda, mode);

  auto fill_pair = [&](std::size_t a, std::size_t b, cplx v) {
    m.set(a, b, v);
    m.set(b, a, std::conj(v));
  };

  if (mode == Mode::lattice) {
    // Entries depend only on the integer site difference.
    const auto span = std::size_t(ax.nodes.back() - ax.nodes.front()) + 1;
    std::vector<cplx> t(span);
    parallel_rows(span, threads, [&](std::size_t d) { t[d] = k(double(d)); });
    t[0] = {t[0].real(), 0.0};
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b <= a; ++b) fill_pair(a, b, t[std::size_t(ax.nodes[a] - ax.nodes[b])]);
    return m;
  }

  if (ax.uniform) {
    const double h = ax.weights.front();
    std::vector<cplx> t(n);
    parallel_rows(n, threads, [&](std::size_t d) { t[d] = h * k(double(d) * h); });
    t[0] = {t[0].real(), 0.0};
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b <= a; ++b) fill_pair(a, b, t[a - b]);
    return m;
  }

  parallel_rows(n, threads, [&](std::size_t a) {
    for (std::size_t b = 0; b <= a; ++b) {
      cplx v = std::sqrt(ax.weights[a] * ax.weights[b]) * k(ax.nodes[a] - ax.nodes[b]);
      if (a == b) v = {v.real(), 0.0};
      fill_pair(a, b, v);
    }
  });
  return m;
}

}  // namespace

std::size_t OverlapOperator::size() const noexcept {
  if (dense_) return dense_->n;
  std::size_t n = 1;
  for (const auto& f : factors_) n *= f.n;
  return n;
}

const HermitianMatrix& OverlapOperator::matrix() const {
  if (!dense_) throw UnsupportedError("OverlapOperator: dense matrix was not assembled");
  return *dense_;
}

OverlapOperator assemble(const RegionSpec& region, const StepSymbol& symbol, double lambda,
                         Mode mode, const AssembleOptions& opt) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("assemble: lambda must be > 0");
  const std::size_t d = region.dimension();
  if (symbol.dimension() != d)
    throw DimensionError("assemble: region has dimension " + std::to_string(d) +
                         ", symbol has dimension " + std::to_string(symbol.dimension()));

  OverlapOperator op;
  op.lambda_ = lambda;
  op.mode_ = mode;
  op.region_ = region;
  op.symbol_ = symbol;

  double total = 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    // Positions are never angular, so materialize the factor as given.
    const IntervalUnion omega = region.factors[j].materialize();
    if (mode == Mode::lattice) {
      check_lattice_symbol(symbol.factor(j));
      op.axes_.push_back(lattice_axis(omega, lambda));
    } else {
      op.axes_.push_back(
          nystrom_axis(omega, lambda, bandwidth(symbol.factor(j)), opt.nodes_per_oscillation));
    }
    total *= double(op.axes_.back().nodes.size());
  }

  auto too_big = [&](double n) { return n * n > opt.memory_budget_entries; };
  const double dense_n = opt.dense || d == 1 ? total : 0.0;
  double worst = dense_n;
  for (const auto& ax : op.axes_) worst = std::max(worst, double(ax.nodes.size()));
  if (too_big(worst)) {
    const double cap =
        lambda * std::pow(std::sqrt(opt.memory_budget_entries) / worst, 1.0 / double(d));
    throw SizeError("assemble: " + std::to_string(std::size_t(worst)) +
                        " rows exceed the memory budget; try lambda <= " + std::to_string(cap),
                    cap);
  }

  for (std::size_t j = 0; j < d; ++j)
    op.factors_.push_back(assemble_factor(op.axes_[j], symbol.factor(j), lambda, mode, opt.threads));

  if (d == 1) {
    op.dense_ = std::make_shared<const HermitianMatrix>(op.factors_.front());
  } else if (opt.dense) {
    HermitianMatrix m = op.factors_.front();
    for (std::size_t j = 1; j < d; ++j) m = kronecker(m, op.factors_[j]);
    op.dense_ = std::make_shared<const HermitianMatrix>(std::move(m));
  }
  return op;
}

OverlapOperator assemble(const RegionSpec& region, const StepSymbol& symbol, double lambda,
                         Mode mode, int resolution) {
  AssembleOptions opt;
  opt.nodes_per_oscillation = resolution;
  return assemble(region, symbol, lambda, mode, opt);
}

OverlapOperator from_matrix(HermitianMatrix m, double lambda, Mode mode) {
  OverlapOperator op;
  op.lambda_ = lambda;
  op.mode_ = mode;
  op.factors_.push_back(m);
  op.dense_ = std::make_shared<const HermitianMatrix>(std::move(m));
  return op;
}

// ---------------------------------------------------------------------------

double ToeplitzOverlap::trace() const { return n == 0 ? 0.0 : double(n) * column[0].real(); }

double ToeplitzOverlap::frobenius_sq() const {
  Neumaier s;
  for (std::size_t m = 0; m < n; ++m)
    s.add((m == 0 ? 1.0 : 2.0) * double(n - m) * std::norm(column[m]));
  return s.value();
}

double ToeplitzOverlap::hs_direct() const {
  if (n == 0) return 0.0;
  Neumaier s;
  s.add(double(n) * column[0].real());
  for (std::size_t m = 0; m < n; ++m)
    s.add(-(m == 0 ? 1.0 : 2.0) * double(n - m) * std::norm(column[m]));
  return s.value();
}

HermitianMatrix ToeplitzOverlap::to_dense() const {
  bool real = true;
  for (const auto& v : column)
    if (v.imag() != 0.0) real = false;
  HermitianMatrix m = real ? HermitianMatrix::real(n) : HermitianMatrix::complex(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      m.set(a, b, a >= b ? column[a - b] : std::conj(column[b - a]));
  return m;
}

ToeplitzOverlap toeplitz_overlap(const IntervalUnion& omega, const StepSymbol1D& sigma,
                                 double lambda, Mode mode, int nodes_per_oscillation) {
  if (!(lambda > 0.0)) throw DomainError("toeplitz_overlap: lambda must be > 0");
  if (omega.size() != 1) throw UnsupportedError("toeplitz_overlap: Omega must be one interval");
  Axis ax;
  if (mode == Mode::lattice) {
    check_lattice_symbol(sigma);
    ax = lattice_axis(omega, lambda);
  } else {
    ax = nystrom_axis(omega, lambda, bandwidth(sigma), nodes_per_oscillation);
  }
  ToeplitzOverlap t;
  t.n = ax.nodes.size();
  t.lambda = lambda;
  t.mode = mode;
  t.column.resize(t.n);
  const Kernel1D k(sigma, lambda, mode);
  const double h = mode == Mode::lattice ? 1.0 : (t.n ? ax.weights.front() : 0.0);
  for (std::size_t m = 0; m < t.n; ++m) t.column[m] = h * k(double(m) * (mode == Mode::lattice ? 1.0 : h));
  if (t.n) t.column[0] = {t.column[0].real(), 0.0};
  return t;
}

// ---------------------------------------------------------------------------

double hs_cross_norm_direct(const HermitianMatrix& m) {
  Neumaier s;
  for (std::size_t i = 0; i < m.n; ++i) s.add(m.at(i, i).real());
  if (m.is_complex)
    for (const auto& v : m.cx) s.add(-std::norm(v));
  else
    for (double v : m.re) s.add(-v * v);
  return s.value();
}

double hs_cross_norm_direct(const OverlapOperator& op) {
  if (op.symbol().dimension() > 0 && !op.symbol().is_projection())
    throw UnsupportedError("hs_cross_norm_direct: symbol is not a projection");
  if (op.has_dense()) return hs_cross_norm_direct(op.matrix());
  // Tr(M1 x M2 ...) - Tr(M1^2 x ...) telescoped over the factors.
  const auto f = op.factors();
  double total = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    double term = hs_cross_norm_direct(f[k]);
    for (std::size_t i = 0; i < k; ++i) term *= f[i].frobenius_sq();
    for (std::size_t i = k + 1; i < f.size(); ++i) term *= f[i].trace();
    total += term;
  }
  return total;
}

CompositeSet support_set(const StepSymbol1D& sigma) {
  if (!sigma.is_projection()) throw UnsupportedError("support_set: symbol is not a projection");
  std::vector<const SymbolPiece*> ones;
  for (const auto& p : sigma.pieces())
    if (p.value == 1.0) ones.push_back(&p);
  const bool fractal = std::any_of(ones.begin(), ones.end(), [](auto* p) { return p->cell.fractal(); });
  if (!fractal) {
    IntervalUnion u;
    for (auto* p : ones) u = unite(u, p->cell.materialize());
    return CompositeSet(u);
  }
  CompositeSet out;
  for (auto* p : ones) out = disjoint_union(out, p->cell);
  return out;
}

double hs_cross_norm_integral_1d(const IntervalUnion& omega, const StepSymbol1D& gamma,
                                 double lambda, const QuadratureOptions& opt) {
  if (!(lambda > 0.0)) throw DomainError("hs_cross_norm_integral: lambda must be > 0");
  const CompositeSet g = support_set(gamma);
  if (g.empty() || omega.empty()) return 0.0;

  const SetTransform tr(g);
  const double c = (lambda / kTwoPi) * (lambda / kTwoPi);
  const double diam = omega.diameter();

  // modulus_sq(Omega, t) is piecewise linear with kinks at endpoint
  // differences; add them as breakpoints when there are few.
  std::vector<double> breaks{0.0, diam};
  if (omega.size() <= 64) {
    std::vector<double> e;
    for (const auto& i : omega.intervals()) {
      e.push_back(i.lo);
      e.push_back(i.hi);
    }
    for (double a : e)
      for (double b : e)
        if (b - a > 0.0 && b - a < diam) breaks.push_back(b - a);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [&](double a, double b) { return b - a <= 1e-14 * diam; }),
               breaks.end());

  auto f = [&](double t) { return tr.abs_sq(lambda * t) * modulus_sq(omega, t); };
  const double width = std::numbers::pi / (lambda * g.diameter());
  const double bound = g.measure() * g.measure() * 2.0 * omega.measure();
  const double delta = 64.0 * std::numeric_limits<double>::epsilon() * g.measure();
  auto floor = [&](double w, double l1) {
    return std::max(1e-14 * bound * w, 2.0 * delta * std::sqrt(2.0 * omega.measure() * w * l1));
  };
  Neumaier head;
  std::uint64_t panel = 1;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    double x = breaks[s];
    const double end = breaks[s + 1];
    while (x < end) {
      while (double(panel) * width <= x) ++panel;
      const double next = std::min(end, double(panel) * width);
      head.add(panel_quadrature(f, x, next, floor, opt));
      x = next;
    }
  }
  // Beyond diam(Omega) the modulus is 2 mes(Omega).
  const double tail = omega.measure() * tail_integral(g, lambda * diam, opt) / lambda;
  return c * (head.value() + tail);
}

double hs_cross_norm_integral(const RegionSpec& omega, const StepSymbol& gamma, double lambda,
                              const QuadratureOptions& opt) {
  if (omega.mode != Mode::continuum)
    throw UnsupportedError("hs_cross_norm_integral: continuum regions only");
  if (omega.dimension() != gamma.dimension())
    throw DimensionError("hs_cross_norm_integral: region and symbol dimensions differ");
  if (!gamma.is_projection())
    throw UnsupportedError("hs_cross_norm_integral: symbol is not a projection");
  const std::size_t d = omega.dimension();
  std::vector<double> a(d), v(d);
  for (std::size_t j = 0; j < d; ++j) {
    const IntervalUnion om = omega.factors[j].materialize();
    a[j] = lambda / kTwoPi * om.measure() * support_set(gamma.factor(j)).measure();
    v[j] = hs_cross_norm_integral_1d(om, gamma.factor(j), lambda, opt);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double term = v[k];
    for (std::size_t i = 0; i < k; ++i) term *= a[i] - v[i];
    for (std::size_t i = k + 1; i < d; ++i) term *= a[i];
    total += term;
  }
  return total;
}

// ---------------------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'S', 'Z', 'G', 'M', 'A', 'T', '0', '1'};
}

void write_matrix(std::ostream& os, const HermitianMatrix& m, double lambda, Mode mode) {
  const std::uint64_t n = m.n;
  const std::uint32_t md = mode == Mode::lattice ? 1 : 0;
  const std::uint32_t cx = m.is_complex ? 1 : 0;
  os.write(kMagic, 8);
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&lambda), sizeof lambda);
  os.write(reinterpret_cast<const char*>(&md), sizeof md);
  os.write(reinterpret_cast<const char*>(&cx), sizeof cx);
  if (m.is_complex)
    os.write(reinterpret_cast<const char*>(m.cx.data()), std::streamsize(m.cx.size() * 16));
  else
    os.write(reinterpret_cast<const char*>(m.re.data()), std::streamsize(m.re.size() * 8));
}

HermitianMatrix read_matrix(std::istream& is, double* lambda, Mode* mode) {
  char magic[8];
  std::uint64_t n = 0;
  double lam = 0.0;
  std::uint32_t md = 0, cx = 0;
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw DomainError("read_matrix: bad magic");
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  is.read(reinterpret_cast<char*>(&lam), sizeof lam);
  is.read(reinterpret_cast<char*>(&md), sizeof md);
  is.read(reinterpret_cast<char*>(&cx), sizeof cx);
  if (!is) throw DomainError("read_matrix: truncated header");
  HermitianMatrix m = cx ? HermitianMatrix::complex(n) : HermitianMatrix::real(n);
  if (cx)
    is.read(reinterpret_cast<char*>(m.cx.data()), std::streamsize(m.cx.size() * 16));
  else
    is.read(reinterpret_cast<char*>(m.re.data()), std::streamsize(m.re.size() * 8));
  if (!is) throw DomainError("read_matrix: truncated data");
  if (lambda) *lambda = lam;
  if (mode) *mode = md ? Mode::lattice : Mode::continuum;
  return m;
}

}  // namespace szego
