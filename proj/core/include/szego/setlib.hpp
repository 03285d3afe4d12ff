#pragma once

// One-dimensional measurable sets as finite unions of closed intervals, the
// "added-interval" Cantor construction with prescribed L2 modulus exponent,
// and Cartesian-product regions in d dimensions.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace szego {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const noexcept { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted, pairwise disjoint closed intervals with lo < hi.
///
/// Construction normalizes the input: intervals are sorted, and intervals
/// that overlap or touch within 1e-15 * scale are merged (scale is the
/// largest endpoint magnitude, at least 1). Degenerate intervals (lo == hi)
/// are dropped; lo > hi or non-finite endpoints raise DomainError.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  explicit IntervalUnion(std::vector<Interval> intervals);

  static IntervalUnion single(double lo, double hi);

  std::span<const Interval> intervals() const noexcept { return iv_; }
  std::size_t size() const noexcept { return iv_.size(); }
  bool empty() const noexcept { return iv_.empty(); }
  const Interval& operator[](std::size_t i) const { return iv_[i]; }

  double measure() const noexcept { return measure_; }
  double lower() const;
  double upper() const;
  double diameter() const { return empty() ? 0.0 : upper() - lower(); }

  IntervalUnion translated(double shift) const;
  IntervalUnion scaled(double factor) const;
  /// Image under x -> -x.
  IntervalUnion mirrored() const;
  bool contains(double x) const;

  friend bool operator==(const IntervalUnion&, const IntervalUnion&) = default;

 private:
  struct Trusted {};
  IntervalUnion(std::vector<Interval> intervals, Trusted);

  std::vector<Interval> iv_;
  double measure_ = 0.0;
};

IntervalUnion unite(const IntervalUnion& a, const IntervalUnion& b);
double intersection_measure(const IntervalUnion& a, const IntervalUnion& b);

/// JSON array of [lo, hi] pairs.
std::string to_json(const IntervalUnion& a);
IntervalUnion interval_union_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Cantor-like sets with two-sided L2 modulus exponent beta.

struct CantorParams {
  double beta = 0.5;
  double Q = 0.25;      // side fraction, 0 < Q < 1/2
  double q = 0.5;       // middle fraction, q = 1 - 2Q
  double gamma = 3.0;   // b_k / a_k, independent of k
  int N = 1;            // number of extra scaled copies
  int depth = 1;        // generations kept by the truncation

  /// a_k^{(alpha)} = alpha (q + Q) Q^{2k}
  double a(int k, double alpha = 1.0) const;
  /// b_k^{(alpha)} = alpha (q/Q + Q) Q^{2k}
  double b(int k, double alpha = 1.0) const;
};

/// Depth used when none is given: the smallest interval q Q^{2 depth} stays
/// above 2^-40 and the materialized set has at most 2^20 intervals.
int default_cantor_depth(double beta);

CantorParams cantor_params_from_beta(double beta);
CantorParams cantor_params_from_beta(double beta, int depth);

/// Omega_alpha truncated after generation params.depth (depth 0 is the single
/// middle interval). Generation k holds 4^k intervals of length alpha q Q^{2k}.
IntervalUnion build_cantor_omega(const CantorParams& params, double alpha);

/// Left shift applied to copy j (copy j is Omega_{gamma^j} - shift_j).
/// shift_0 = 0 and shift_j = shift_{j-1} + 1 + gamma^j, so copy j ends one unit
/// to the left of where copy j-1 starts.
std::vector<double> cantor_copy_shifts(const CantorParams& params);

/// False when the copies are so wide (beta close to 1) that the unit gaps
/// or the finest intervals cannot be placed in absolute double coordinates.
bool cantor_representable(const CantorParams& params);

/// Union of the N+1 copies Omega_{gamma^j} - shift_j, j = 0..N. Throws
/// TruncationError when !cantor_representable(params).
IntervalUnion build_cantor_set(const CantorParams& params);

/// Number of intervals build_cantor_set would produce.
std::size_t cantor_interval_count(const CantorParams& params);

// ---------------------------------------------------------------------------
// Sets kept in generator form so that transforms never need the (possibly
// huge) explicit interval list.

/// Omega_alpha (truncated at depth) translated by `offset`.
struct CantorPiece {
  double alpha = 1.0;
  double offset = 0.0;
  double Q = 0.25;
  double q = 0.5;
  int depth = 1;

  double measure() const;
  double lower() const { return offset; }
  double upper() const { return offset + alpha; }
  IntervalUnion materialize() const;
};

/// Disjoint union of components, each an explicit IntervalUnion or a
/// CantorPiece. Component hulls must not overlap.
class CompositeSet {
 public:
  using Component = std::variant<IntervalUnion, CantorPiece>;

  CompositeSet() = default;
  explicit CompositeSet(std::vector<Component> components);
  CompositeSet(const IntervalUnion& u);  // NOLINT: implicit by intent

  static CompositeSet interval(double lo, double hi) {
    return CompositeSet(IntervalUnion::single(lo, hi));
  }

  std::span<const Component> components() const noexcept { return parts_; }
  bool empty() const noexcept { return parts_.empty(); }
  bool fractal() const noexcept;
  double measure() const noexcept { return measure_; }
  double lower() const;
  double upper() const;
  double diameter() const { return empty() ? 0.0 : upper() - lower(); }
  /// True when x -> -x maps the set onto itself (checked on the explicit
  /// intervals; fractal components are never treated as symmetric).
  bool symmetric() const;

  CompositeSet scaled(double factor) const;
  CompositeSet translated(double shift) const;
  IntervalUnion materialize() const;

  friend CompositeSet disjoint_union(const CompositeSet& a, const CompositeSet& b);

 private:
  std::vector<Component> parts_;
  double measure_ = 0.0;
};

CompositeSet cantor_composite(const CantorParams& params);

// ---------------------------------------------------------------------------
// L2 modulus of continuity of indicator functions.

/// mes(A \ (A - h)), computed exactly by a sweep over A and the gaps of A - h.
double set_difference_measure(const IntervalUnion& a, double h);

/// (omega_2[chi_A](h))^2 = mes(A \ (A-h)) + mes(A \ (A+h)).
double modulus_sq(const IntervalUnion& a, double h);

/// modulus_sq(h) / h^beta on the dyadic grid h_j = a_1 2^-j, stopped at the
/// resolution Q^{2 depth} of the truncated set.
struct ModulusWindow {
  double beta = 0.0;
  std::vector<double> h;
  std::vector<double> modulus_sq;
  std::vector<double> ratio;
  double c1 = 0.0;  // min ratio
  double c2 = 0.0;  // max ratio
  double decades = 0.0;
  double window_ratio() const { return c1 > 0.0 ? c2 / c1 : INFINITY; }
};

ModulusWindow cantor_modulus_window(const CantorParams& params);

// ---------------------------------------------------------------------------
// d-dimensional product regions.

enum class Mode { continuum, lattice };
/// Units of momentum-space regions on the lattice: radians on [-pi, pi], or
/// cycles on [-1/2, 1/2] (multiplied by 2 pi before use).
enum class AngularUnit { radians, cycles };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct RegionSpec {
  std::vector<CompositeSet> factors;
  Mode mode = Mode::continuum;
  AngularUnit unit = AngularUnit::radians;

  RegionSpec() = default;
  RegionSpec(std::vector<CompositeSet> f, Mode m = Mode::continuum,
             AngularUnit u = AngularUnit::radians);

  /// [0,1]^d style cube: the same interval in every dimension.
  static RegionSpec cube(std::size_t d, double lo, double hi, Mode m = Mode::continuum,
                         AngularUnit u = AngularUnit::radians);

  std::size_t dimension() const noexcept { return factors.size(); }
  double measure() const;
  bool fractal() const;
  /// Factor j as explicit intervals, in radians when unit == cycles.
  IntervalUnion factor_intervals(std::size_t j) const;
};

/// (omega_2[chi_R](h))^2 for a product region, via the per-factor
/// intersection measures. Continuum regions only.
double product_modulus_sq(const RegionSpec& region, std::span<const double> h);

}  // namespace szego
