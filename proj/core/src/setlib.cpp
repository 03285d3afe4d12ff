#include "szego/setlib.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "szego/error.hpp"

namespace szego {

namespace {

constexpr double kMergeTolerance = 1e-15;
constexpr std::size_t kMaxMaterializedIntervals = std::size_t{1} << 26;

double endpoint_scale(const std::vector<Interval>& iv) {
  double s = 1.0;
  for (const auto& i : iv) s = std::max({s, std::abs(i.lo), std::abs(i.hi)});
  return s;
}

double sum_lengths(const std::vector<Interval>& iv) {
  double m = 0.0;
  for (const auto& i : iv) m += i.length();
  return m;
}

}  // namespace

IntervalUnion::IntervalUnion(std::vector<Interval> intervals) {
  for (const auto& i : intervals) {
    if (!std::isfinite(i.lo) || !std::isfinite(i.hi))
      throw DomainError("IntervalUnion: non-finite endpoint");
    if (i.lo > i.hi) throw DomainError("IntervalUnion: interval with lo > hi");
  }
  std::erase_if(intervals, [](const Interval& i) { return !(i.lo < i.hi); });
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& x, const Interval& y) { return x.lo < y.lo; });

  const double tol = kMergeTolerance * endpoint_scale(intervals);
  for (const auto& i : intervals) {
    if (!iv_.empty() && i.lo <= iv_.back().hi + tol)
      iv_.back().hi = std::max(iv_.back().hi, i.hi);
    else
      iv_.push_back(i);
  }
  measure_ = sum_lengths(iv_);
}

IntervalUnion::IntervalUnion(std::vector<Interval> intervals, Trusted)
    : iv_(std::move(intervals)), measure_(sum_lengths(iv_)) {}

IntervalUnion IntervalUnion::single(double lo, double hi) {
  return IntervalUnion({Interval{lo, hi}});
}

double IntervalUnion::lower() const {
  if (empty()) throw DomainError("IntervalUnion::lower on empty set");
  return iv_.front().lo;
}

double IntervalUnion::upper() const {
  if (empty()) throw DomainError("IntervalUnion::upper on empty set");
  return iv_.back().hi;
}

IntervalUnion IntervalUnion::translated(double shift) const {
  std::vector<Interval> out(iv_);
  for (auto& i : out) {
    i.lo += shift;
    i.hi += shift;
  }
  return IntervalUnion(std::move(out));
}

IntervalUnion IntervalUnion::scaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("IntervalUnion::scaled needs factor > 0");
  std::vector<Interval> out(iv_);
  for (auto& i : out) {
    i.lo *= factor;
    i.hi *= factor;
  }
  return IntervalUnion(std::move(out), Trusted{});
}

IntervalUnion IntervalUnion::mirrored() const {
  std::vector<Interval> out;
  out.reserve(iv_.size());
  for (auto it = iv_.rbegin(); it != iv_.rend(); ++it) out.push_back({-it->hi, -it->lo});
  return IntervalUnion(std::move(out), Trusted{});
}

bool IntervalUnion::contains(double x) const {
  auto it = std::upper_bound(iv_.begin(), iv_.end(), x,
                             [](double v, const Interval& i) { return v < i.lo; });
  if (it == iv_.begin()) return false;
  --it;
  return x <= it->hi;
}

IntervalUnion unite(const IntervalUnion& a, const IntervalUnion& b) {
  std::vector<Interval> all(a.intervals().begin(), a.intervals().end());
  all.insert(all.end(), b.intervals().begin(), b.intervals().end());
  return IntervalUnion(std::move(all));
}

double intersection_measure(const IntervalUnion& a, const IntervalUnion& b) {
  std::size_t i = 0, j = 0;
  double m = 0.0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].lo, b[j].lo);
    const double hi = std::min(a[i].hi, b[j].hi);
    if (hi > lo) m += hi - lo;
    if (a[i].hi < b[j].hi)
      ++i;
    else
      ++j;
  }
  return m;
}

std::string to_json(const IntervalUnion& a) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& i : a.intervals()) arr.push_back({i.lo, i.hi});
  return arr.dump();
}

IntervalUnion interval_union_from_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("interval union JSON: ") + e.what());
  }
  if (!arr.is_array()) throw DomainError("interval union JSON must be an array");
  std::vector<Interval> iv;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw DomainError("interval union JSON: expected [lo, hi] pairs");
    iv.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return IntervalUnion(std::move(iv));
}

// ---------------------------------------------------------------------------

double CantorParams::a(int k, double alpha) const {
  return alpha * (q + Q) * std::pow(Q, 2 * k);
}

double CantorParams::b(int k, double alpha) const {
  return alpha * (q / Q + Q) * std::pow(Q, 2 * k);
}

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw DomainError("cantor: beta must lie in (0,1), got " + std::to_string(beta));
}

std::size_t intervals_per_copy(int depth) {
  // sum_{k<=depth} 4^k
  std::size_t total = 0, gen = 1;
  for (int k = 0; k <= depth; ++k, gen *= 4) total += gen;
  return total;
}

}  // namespace

int default_cantor_depth(double beta) {
  const CantorParams p = cantor_params_from_beta(beta, 1);
  const double floor_len = std::ldexp(1.0, -40);
  // Near beta = 1 generation 1 is already below resolution; keep only the
  // middle intervals.
  int depth = 0;
  while (p.q * std::pow(p.Q, 2 * (depth + 1)) >= floor_len &&
         std::size_t(p.N + 1) * intervals_per_copy(depth + 1) <= (std::size_t{1} << 20))
    ++depth;
  return depth;
}

CantorParams cantor_params_from_beta(double beta) {
  return cantor_params_from_beta(beta, default_cantor_depth(beta));
}

CantorParams cantor_params_from_beta(double beta, int depth) {
  check_beta(beta);
  if (depth < 0) throw DomainError("cantor: depth must be >= 0");
  CantorParams p;
  p.beta = beta;
  p.Q = std::exp2(-1.0 / (1.0 - beta));
  p.q = 1.0 - 2.0 * p.Q;
  if (!(p.Q > 0.0 && p.q > 0.0))
    throw DomainError("cantor: beta too close to 0 or 1 for double precision");
  // With q = 1 - 2Q: b_k/a_k = (1-Q)/Q and the copies must reach 1/(Q(1-Q)).
  // gamma^N >= 1/(Q(1-Q))  <=>  (N-1) log(1/Q) >= -(N+1) log(1-Q); the naive
  // ratio loses the (1-Q) factors once Q drops below machine epsilon.
  p.gamma = (1.0 - p.Q) / p.Q;
  const double L = -std::log(p.Q), M = -std::log1p(-p.Q);
  p.N = 1;
  while (double(p.N - 1) * L < double(p.N + 1) * M) ++p.N;
  p.depth = depth;
  return p;
}

double CantorPiece::measure() const {
  // alpha q sum_{k<=depth} (4 Q^2)^k
  const double r = 4.0 * Q * Q;
  double s = 0.0, t = 1.0;
  for (int k = 0; k <= depth; ++k, t *= r) s += t;
  return alpha * q * s;
}

IntervalUnion CantorPiece::materialize() const {
  if (alpha * q * std::pow(Q, 2 * depth) < std::numeric_limits<double>::min())
    throw TruncationError("cantor: interval lengths underflow at depth " +
                          std::to_string(depth));
  if (intervals_per_copy(depth) > kMaxMaterializedIntervals)
    throw TruncationError("cantor: depth " + std::to_string(depth) +
                          " yields too many intervals to materialize");

  // Offsets of the 4^k sub-copies at each generation, grown breadth-first.
  std::vector<Interval> out;
  out.reserve(intervals_per_copy(depth));
  std::vector<double> origins{offset};
  double a = alpha;
  for (int k = 0; k <= depth; ++k) {
    for (double o : origins) out.push_back({o + a * Q, o + a * (Q + q)});
    if (k == depth) break;
    const double step[4] = {0.0, a * Q - a * Q * Q, a * (1.0 - Q), a - a * Q * Q};
    std::vector<double> next;
    next.reserve(origins.size() * 4);
    for (double o : origins)
      for (double s : step) next.push_back(o + s);
    origins = std::move(next);
    a *= Q * Q;
  }
  return IntervalUnion(std::move(out));
}

IntervalUnion build_cantor_omega(const CantorParams& params, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("cantor: alpha must be > 0");
  CantorPiece piece{alpha, 0.0, params.Q, params.q, params.depth};
  IntervalUnion u = piece.materialize();
  if (u.size() != intervals_per_copy(params.depth))
    throw ConsistencyError("cantor: generated intervals are not disjoint");
  return u;
}

std::vector<double> cantor_copy_shifts(const CantorParams& params) {
  std::vector<double> s{0.0};
  double g = 1.0;
  for (int j = 1; j <= params.N; ++j) {
    g *= params.gamma;
    s.push_back(s.back() + 1.0 + g);
  }
  return s;
}

bool cantor_representable(const CantorParams& params) {
  const auto shifts = cantor_copy_shifts(params);
  const double eps = std::numeric_limits<double>::epsilon();
  const double extent = shifts.back() + std::pow(params.gamma, params.N);
  double alpha = 1.0;
  for (int j = 0; j <= params.N; ++j, alpha *= params.gamma) {
    // Finest interval or gap of copy j, against its own placement error and
    // against the merge tolerance of the whole union.
    const double finest = std::min(1.0, alpha * std::min(params.q, params.Q) * std::pow(params.Q, 2 * params.depth));
    if (eps * (shifts[std::size_t(j)] + alpha) > 1e-3 * finest) return false;
    if (10.0 * kMergeTolerance * extent > finest) return false;
  }
  return true;
}

namespace {

void require_representable(const CantorParams& params) {
  if (!cantor_representable(params))
    throw TruncationError("cantor: beta=" + std::to_string(params.beta) + " copies span " +
                          std::to_string(cantor_copy_shifts(params).back()) +
                          ", too wide to place the unit gaps in double precision");
}

}  // namespace

CompositeSet cantor_composite(const CantorParams& params) {
  require_representable(params);
  const auto shifts = cantor_copy_shifts(params);
  std::vector<CompositeSet::Component> parts;
  double alpha = 1.0;
  for (int j = 0; j <= params.N; ++j) {
    parts.emplace_back(CantorPiece{alpha, -shifts[std::size_t(j)], params.Q, params.q, params.depth});
    alpha *= params.gamma;
  }
  return CompositeSet(std::move(parts));
}

IntervalUnion build_cantor_set(const CantorParams& params) {
  require_representable(params);
  const auto shifts = cantor_copy_shifts(params);
  std::vector<Interval> all;
  all.reserve(cantor_interval_count(params));
  double alpha = 1.0;
  double prev_min = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= params.N; ++j) {
    IntervalUnion copy = build_cantor_omega(params, alpha).translated(-shifts[std::size_t(j)]);
    if (!(copy.upper() < prev_min))
      throw ConsistencyError("cantor: copy " + std::to_string(j) + " overlaps copy " +
                             std::to_string(j - 1));
    prev_min = copy.lower();
    all.insert(all.end(), copy.intervals().begin(), copy.intervals().end());
    alpha *= params.gamma;
  }
  const std::size_t expected = all.size();
  IntervalUnion u(std::move(all));
  if (u.size() != expected) throw ConsistencyError("cantor: copies overlap after translation");
  return u;
}

std::size_t cantor_interval_count(const CantorParams& params) {
  return std::size_t(params.N + 1) * intervals_per_copy(params.depth);
}

// ---------------------------------------------------------------------------

namespace {

double component_lower(const CompositeSet::Component& c) {
  return std::visit([](const auto& x) { return x.lower(); }, c);
}
double component_upper(const CompositeSet::Component& c) {
  return std::visit([](const auto& x) { return x.upper(); }, c);
}
double component_measure(const CompositeSet::Component& c) {
  return std::visit([](const auto& x) { return x.measure(); }, c);
}

}  // namespace

CompositeSet::CompositeSet(std::vector<Component> components) {
  for (auto& c : components) {
    if (const auto* u = std::get_if<IntervalUnion>(&c); u && u->empty()) continue;
    parts_.push_back(std::move(c));
  }
  std::sort(parts_.begin(), parts_.end(), [](const Component& x, const Component& y) {
    return component_lower(x) < component_lower(y);
  });
  for (std::size_t i = 1; i < parts_.size(); ++i)
    if (component_lower(parts_[i]) < component_upper(parts_[i - 1]))
      throw ConsistencyError("CompositeSet: component hulls overlap");
  for (const auto& c : parts_) measure_ += component_measure(c);
}

CompositeSet::CompositeSet(const IntervalUnion& u) : CompositeSet(std::vector<Component>{u}) {}

bool CompositeSet::fractal() const noexcept {
  return std::any_of(parts_.begin(), parts_.end(),
                     [](const Component& c) { return std::holds_alternative<CantorPiece>(c); });
}

double CompositeSet::lower() const {
  if (empty()) throw DomainError("CompositeSet::lower on empty set");
  return component_lower(parts_.front());
}

double CompositeSet::upper() const {
  if (empty()) throw DomainError("CompositeSet::upper on empty set");
  return component_upper(parts_.back());
}

bool CompositeSet::symmetric() const {
  if (fractal()) return false;
  const IntervalUnion u = materialize();
  const IntervalUnion m = u.mirrored();
  if (u.size() != m.size()) return false;
  const double tol = 1e-14 * std::max(1.0, std::max(std::abs(u.lower()), std::abs(u.upper())));
  for (std::size_t i = 0; i < u.size(); ++i)
    if (std::abs(u[i].lo - m[i].lo) > tol || std::abs(u[i].hi - m[i].hi) > tol) return false;
  return true;
}

CompositeSet CompositeSet::scaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("CompositeSet::scaled needs factor > 0");
  std::vector<Component> out;
  for (const auto& c : parts_) {
    if (const auto* u = std::get_if<IntervalUnion>(&c)) {
      out.emplace_back(u->scaled(factor));
    } else {
      CantorPiece p = std::get<CantorPiece>(c);
      p.alpha *= factor;
      p.offset *= factor;
      out.emplace_back(p);
    }
  }
  return CompositeSet(std::move(out));
}

CompositeSet CompositeSet::translated(double shift) const {
  std::vector<Component> out;
  for (const auto& c : parts_) {
    if (const auto* u = std::get_if<IntervalUnion>(&c)) {
      out.emplace_back(u->translated(shift));
    } else {
      CantorPiece p = std::get<CantorPiece>(c);
      p.offset += shift;
      out.emplace_back(p);
    }
  }
  return CompositeSet(std::move(out));
}

IntervalUnion CompositeSet::materialize() const {
  std::vector<Interval> all;
  for (const auto& c : parts_) {
    const IntervalUnion u = std::holds_alternative<IntervalUnion>(c)
                                ? std::get<IntervalUnion>(c)
                                : std::get<CantorPiece>(c).materialize();
    all.insert(all.end(), u.intervals().begin(), u.intervals().end());
  }
  return IntervalUnion(std::move(all));
}

CompositeSet disjoint_union(const CompositeSet& a, const CompositeSet& b) {
  std::vector<CompositeSet::Component> parts(a.parts_.begin(), a.parts_.end());
  parts.insert(parts.end(), b.parts_.begin(), b.parts_.end());
  return CompositeSet(std::move(parts));
}

// ---------------------------------------------------------------------------

double set_difference_measure(const IntervalUnion& a, double h) {
  if (a.empty()) return 0.0;
  // A \ (A - h) = A intersected with the gaps of A - h. Gap g of A - h is
  // (hi_g - h, lo_{g+1} - h), with unbounded first and last gaps.
  const auto iv = a.intervals();
  const std::size_t n = iv.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto gap_lo = [&](std::size_t g) { return g == 0 ? -inf : iv[g - 1].hi - h; };
  auto gap_hi = [&](std::size_t g) { return g == n ? inf : iv[g].lo - h; };

  double m = 0.0;
  std::size_t i = 0, g = 0;
  while (i < n && g <= n) {
    const double lo = std::max(iv[i].lo, gap_lo(g));
    const double hi = std::min(iv[i].hi, gap_hi(g));
    if (hi > lo) m += hi - lo;
    if (iv[i].hi < gap_hi(g))
      ++i;
    else
      ++g;
  }
  return m;
}

double modulus_sq(const IntervalUnion& a, double h) {
  return set_difference_measure(a, h) + set_difference_measure(a, -h);
}

ModulusWindow cantor_modulus_window(const CantorParams& params) {
  const IntervalUnion u = build_cantor_set(params);
  ModulusWindow w;
  w.beta = params.beta;
  const double top = params.a(1);
  const double floor_h = std::pow(params.Q, 2 * params.depth);
  w.c1 = INFINITY;
  for (int j = 0; top * std::ldexp(1.0, -j) >= floor_h; ++j) {
    const double h = top * std::ldexp(1.0, -j);
    const double m = modulus_sq(u, h);
    w.h.push_back(h);
    w.modulus_sq.push_back(m);
    w.ratio.push_back(m / std::pow(h, params.beta));
    w.c1 = std::min(w.c1, w.ratio.back());
    w.c2 = std::max(w.c2, w.ratio.back());
  }
  if (w.h.empty()) w.c1 = 0.0;
  else w.decades = std::log10(w.h.front() / w.h.back());
  return w;
}

// ---------------------------------------------------------------------------

std::string to_string(Mode m) { return m == Mode::lattice ? "lattice" : "nystrom"; }

Mode mode_from_string(const std::string& s) {
  if (s == "lattice") return Mode::lattice;
  if (s == "nystrom" || s == "continuum") return Mode::continuum;
  throw DomainError("unknown mode '" + s + "' (expected lattice or nystrom)");
}

RegionSpec::RegionSpec(std::vector<CompositeSet> f, Mode m, AngularUnit u)
    : factors(std::move(f)), mode(m), unit(u) {
  if (factors.empty()) throw DomainError("RegionSpec: dimension must be >= 1");
  for (const auto& c : factors)
    if (c.empty()) throw DomainError("RegionSpec: every factor must be nonempty");
}

RegionSpec RegionSpec::cube(std::size_t d, double lo, double hi, Mode m, AngularUnit u) {
  return RegionSpec(std::vector<CompositeSet>(d, CompositeSet::interval(lo, hi)), m, u);
}

double RegionSpec::measure() const {
  double m = 1.0;
  for (const auto& f : factors) m *= f.measure();
  return m;
}

bool RegionSpec::fractal() const {
  return std::any_of(factors.begin(), factors.end(),
                     [](const CompositeSet& c) { return c.fractal(); });
}

IntervalUnion RegionSpec::factor_intervals(std::size_t j) const {
  IntervalUnion u = factors.at(j).materialize();
  if (unit == AngularUnit::cycles) u = u.scaled(2.0 * std::numbers::pi);
  return u;
}

double product_modulus_sq(const RegionSpec& region, std::span<const double> h) {
  if (h.size() != region.dimension())
    throw DimensionError("product_modulus_sq: h has " + std::to_string(h.size()) +
                         " components, region has dimension " +
                         std::to_string(region.dimension()));
  if (region.mode != Mode::continuum)
    throw UnsupportedError("product_modulus_sq: continuum regions only");

  const std::size_t d = region.dimension();
  std::vector<IntervalUnion> f;
  for (std::size_t j = 0; j < d; ++j) f.push_back(region.factors[j].materialize());

  // mes(R \ (R - h)) = prod m_j - prod (m_j - s_j), telescoped so that every
  // term is nonnegative.
  auto diff = [&](double sign) {
    double total = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      double term = set_difference_measure(f[k], sign * h[k]);
      for (std::size_t i = 0; i < k; ++i)
        term *= f[i].measure() - set_difference_measure(f[i], sign * h[i]);
      for (std::size_t i = k + 1; i < d; ++i) term *= f[i].measure();
      total += term;
    }
    return total;
  };
  return diff(1.0) + diff(-1.0);
}

}  // namespace szego
