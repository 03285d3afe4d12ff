#include "szego/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "szego/error.hpp"

namespace szego {

StepSymbol1D::StepSymbol1D(std::vector<SymbolPiece> pieces) {
  for (auto& p : pieces) {
    if (!std::isfinite(p.value)) throw DomainError("StepSymbol: non-finite value");
    if (p.cell.empty()) continue;
    pieces_.push_back(std::move(p));
  }
  std::sort(pieces_.begin(), pieces_.end(), [](const SymbolPiece& a, const SymbolPiece& b) {
    return a.cell.lower() < b.cell.lower();
  });
  // Cells must be disjoint. Hull-disjoint cells are accepted directly,
  // otherwise compare explicit intervals.
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
    if (pieces_[i].cell.upper() <= pieces_[i + 1].cell.lower()) continue;
    if (pieces_[i].cell.fractal() || pieces_[i + 1].cell.fractal())
      throw ConsistencyError("StepSymbol: fractal cells must have disjoint hulls");
    if (intersection_measure(pieces_[i].cell.materialize(), pieces_[i + 1].cell.materialize()) > 0)
      throw ConsistencyError("StepSymbol: cells overlap");
  }
}

StepSymbol1D StepSymbol1D::indicator(const CompositeSet& gamma) {
  return StepSymbol1D({SymbolPiece{gamma, 1.0}});
}

bool StepSymbol1D::empty() const noexcept {
  return std::none_of(pieces_.begin(), pieces_.end(),
                      [](const SymbolPiece& p) { return p.value != 0.0; });
}

double StepSymbol1D::sup_norm() const noexcept {
  double s = 0.0;
  for (const auto& p : pieces_) s = std::max(s, std::abs(p.value));
  return s;
}

bool StepSymbol1D::is_projection() const noexcept {
  return std::all_of(pieces_.begin(), pieces_.end(),
                     [](const SymbolPiece& p) { return p.value == 0.0 || p.value == 1.0; });
}

double StepSymbol1D::support_lower() const {
  for (const auto& p : pieces_)
    if (p.value != 0.0) return p.cell.lower();
  throw DomainError("StepSymbol: empty support");
}

double StepSymbol1D::support_upper() const {
  for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it)
    if (it->value != 0.0) return it->cell.upper();
  throw DomainError("StepSymbol: empty support");
}

bool StepSymbol1D::symmetric() const {
  if (fractal()) return false;
  // Compare the sorted list of (interval, value) with its mirror image.
  std::vector<std::pair<Interval, double>> a, m;
  for (const auto& p : pieces_) {
    if (p.value == 0.0) continue;
    const IntervalUnion cell = p.cell.materialize();
    for (const auto& i : cell.intervals()) {
      a.push_back({i, p.value});
      m.push_back({Interval{-i.hi, -i.lo}, p.value});
    }
  }
  auto by_lo = [](const auto& x, const auto& y) { return x.first.lo < y.first.lo; };
  std::sort(a.begin(), a.end(), by_lo);
  std::sort(m.begin(), m.end(), by_lo);
  double scale = 1.0;
  for (const auto& x : a) scale = std::max({scale, std::abs(x.first.lo), std::abs(x.first.hi)});
  const double tol = 1e-14 * scale;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i].first.lo - m[i].first.lo) > tol ||
        std::abs(a[i].first.hi - m[i].first.hi) > tol || a[i].second != m[i].second)
      return false;
  }
  return true;
}

bool StepSymbol1D::fractal() const {
  return std::any_of(pieces_.begin(), pieces_.end(),
                     [](const SymbolPiece& p) { return p.cell.fractal(); });
}

StepSymbol1D StepSymbol1D::scaled_argument(double factor) const {
  std::vector<SymbolPiece> out;
  for (const auto& p : pieces_) out.push_back({p.cell.scaled(factor), p.value});
  return StepSymbol1D(std::move(out));
}

// ---------------------------------------------------------------------------

StepSymbol::StepSymbol(std::vector<StepSymbol1D> factors, AngularUnit unit)
    : unit_(unit) {
  if (factors.empty()) throw DomainError("StepSymbol: dimension must be >= 1");
  const double s = unit == AngularUnit::cycles ? 2.0 * std::numbers::pi : 1.0;
  for (auto& f : factors) factors_.push_back(s == 1.0 ? std::move(f) : f.scaled_argument(s));
}

StepSymbol StepSymbol::indicator(const RegionSpec& gamma) {
  std::vector<StepSymbol1D> f;
  for (const auto& c : gamma.factors) f.push_back(StepSymbol1D::indicator(c));
  return StepSymbol(std::move(f), gamma.unit);
}

bool StepSymbol::empty() const noexcept {
  return std::any_of(factors_.begin(), factors_.end(),
                     [](const StepSymbol1D& f) { return f.empty(); });
}

double StepSymbol::sup_norm() const noexcept {
  double s = 1.0;
  for (const auto& f : factors_) s *= f.sup_norm();
  return s;
}

bool StepSymbol::is_projection() const noexcept {
  return std::all_of(factors_.begin(), factors_.end(),
                     [](const StepSymbol1D& f) { return f.is_projection(); });
}

bool StepSymbol::symmetric() const {
  return std::all_of(factors_.begin(), factors_.end(),
                     [](const StepSymbol1D& f) { return f.symmetric(); });
}

bool StepSymbol::fractal() const {
  return std::any_of(factors_.begin(), factors_.end(),
                     [](const StepSymbol1D& f) { return f.fractal(); });
}

double StepSymbol::support_measure() const {
  double m = 1.0;
  for (const auto& f : factors_) {
    double mj = 0.0;
    for (const auto& p : f.pieces())
      if (p.value != 0.0) mj += p.cell.measure();
    m *= mj;
  }
  return m;
}

double StepSymbol::integrate(const std::function<double(double)>& f) const {
  // Enumerate product cells with an odometer over the per-factor pieces.
  const std::size_t d = factors_.size();
  std::vector<std::size_t> idx(d, 0);
  for (const auto& fj : factors_)
    if (fj.pieces().empty()) return 0.0;
  double total = 0.0;
  while (true) {
    double value = 1.0, mes = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      const auto& p = factors_[j].pieces()[idx[j]];
      value *= p.value;
      mes *= p.cell.measure();
    }
    total += f(value) * mes;
    std::size_t j = 0;
    while (j < d && ++idx[j] == factors_[j].pieces().size()) idx[j++] = 0;
    if (j == d) break;
  }
  return total;
}

StepSymbol StepSymbol::scaled_argument(double factor) const {
  std::vector<StepSymbol1D> f;
  for (const auto& x : factors_) f.push_back(x.scaled_argument(factor));
  return StepSymbol(std::move(f), AngularUnit::radians);
}

}  // namespace szego
