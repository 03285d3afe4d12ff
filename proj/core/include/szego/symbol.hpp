#pragma once

// Real-valued, x-independent symbols sigma(xi) that are piecewise constant
// and product-structured: sigma(xi) = prod_j sigma_j(xi_j).

#include <cstddef>
#include <functional>
#include <vector>

#include "szego/setlib.hpp"

namespace szego {

struct SymbolPiece {
  CompositeSet cell;
  double value = 1.0;
};

/// sigma_j = sum_c value_c chi_{cell_c}; the cells are pairwise disjoint.
class StepSymbol1D {
 public:
  StepSymbol1D() = default;
  explicit StepSymbol1D(std::vector<SymbolPiece> pieces);
  static StepSymbol1D indicator(const CompositeSet& gamma);

  std::span<const SymbolPiece> pieces() const noexcept { return pieces_; }
  bool empty() const noexcept;  // identically zero
  double sup_norm() const noexcept;
  bool is_projection() const noexcept;
  /// Hull of the support (cells with nonzero value).
  double support_lower() const;
  double support_upper() const;
  /// sigma_j(-xi) = sigma_j(xi).
  bool symmetric() const;
  bool fractal() const;

  StepSymbol1D scaled_argument(double factor) const;

 private:
  std::vector<SymbolPiece> pieces_;
};

class StepSymbol {
 public:
  StepSymbol() = default;
  StepSymbol(std::vector<StepSymbol1D> factors, AngularUnit unit = AngularUnit::radians);

  /// sigma = chi_Gamma for a product region Gamma (its mode is ignored).
  static StepSymbol indicator(const RegionSpec& gamma);

  std::size_t dimension() const noexcept { return factors_.size(); }
  AngularUnit unit() const noexcept { return unit_; }
  /// Factor j with cells expressed in radians.
  const StepSymbol1D& factor(std::size_t j) const { return factors_.at(j); }

  bool empty() const noexcept;
  double sup_norm() const noexcept;
  bool is_projection() const noexcept;
  bool symmetric() const;
  bool fractal() const;
  /// Lebesgue measure of the support.
  double support_measure() const;

  /// Sum over product cells of f(value) * mes(cell); f(0) is not included
  /// (the complement of the support is handled by the caller).
  double integrate(const std::function<double(double)>& f) const;

  StepSymbol scaled_argument(double factor) const;

 private:
  std::vector<StepSymbol1D> factors_;
  AngularUnit unit_ = AngularUnit::radians;
};

}  // namespace szego
