#include "szego/scaling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/math/tools/roots.hpp>

#include "szego/error.hpp"

namespace szego {

std::vector<double> dyadic_grid(double lambda_min, double lambda_max, int points_per_octave) {
  if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min))
    throw DomainError("dyadic_grid: need 0 < lambda_min <= lambda_max");
  if (points_per_octave < 1) throw DomainError("dyadic_grid: points_per_octave must be >= 1");
  std::vector<double> g;
  for (int k = 0;; ++k) {
    const double l = lambda_min * std::exp2(double(k) / points_per_octave);
    if (l > lambda_max * (1.0 + 1e-12)) break;
    g.push_back(l);
  }
  return g;
}

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::entropy: return "entropy";
    case Quantity::variance: return "variance";
    case Quantity::particle_number: return "particle_number";
  }
  return "?";
}

// ---------------------------------------------------------------------------

namespace {

std::string describe(const CompositeSet& c) {
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto& comp : c.components()) {
    if (!first) os << " u ";
    first = false;
    if (const auto* u = std::get_if<IntervalUnion>(&comp)) {
      if (u->size() <= 4) {
        for (std::size_t i = 0; i < u->size(); ++i)
          os << (i ? " u " : "") << "[" << (*u)[i].lo << "," << (*u)[i].hi << "]";
      } else {
        os << u->size() << " intervals in [" << u->lower() << "," << u->upper() << "]";
      }
    } else {
      const auto& p = std::get<CantorPiece>(comp);
      os << "cantor(alpha=" << p.alpha << ",offset=" << p.offset << ",Q=" << p.Q
         << ",depth=" << p.depth << ")";
    }
  }
  return os.str();
}

std::string describe(const RegionSpec& r) {
  std::string s;
  for (std::size_t j = 0; j < r.dimension(); ++j) s += (j ? " x " : "") + describe(r.factors[j]);
  return s;
}

std::string describe(const StepSymbol& s) {
  std::string out;
  for (std::size_t j = 0; j < s.dimension(); ++j) {
    out += j ? " x " : "";
    for (std::size_t k = 0; k < s.factor(j).pieces().size(); ++k) {
      const auto& p = s.factor(j).pieces()[k];
      out += (k ? " + " : "") + std::to_string(p.value) + "*chi{" + describe(p.cell) + "}";
    }
  }
  return out;
}

double min_entropy_gap(const SpectralResult& s) {
  double g = std::numeric_limits<double>::infinity();
  for (double e : s.eigenvalues) g = std::min(g, binary_entropy(e) - 4.0 * e * (1.0 - e));
  return s.eigenvalues.empty() ? 0.0 : g;
}

}  // namespace

SweepPoint run_point(const Experiment& e, double lambda) {
  SweepPoint p;
  p.lambda = lambda;
  const bool projection = e.symbol.is_projection();
  const bool spectrum = e.need_spectrum || !e.functionals.empty();

  if (spectrum) {
    AssembleOptions opt = e.assemble;
    opt.dense = e.omega.dimension() == 1 || e.eigen_route == EigenRoute::dense;
    const OverlapOperator op = assemble(e.omega, e.symbol, lambda, e.mode, opt);
    const SpectralResult s = eigenvalues(op, e.eigen_route);
    p.n = s.n;
    p.route = "eigen";
    p.clamp = s.clamp;
    double tr = 0.0;
    for (double v : s.eigenvalues) tr += v;
    p.particle_number = tr;
    if (projection) {
      p.entropy = entropy(s);
      p.variance = variance(s);
      p.min_entropy_gap = min_entropy_gap(s);
    }
    for (const auto& f : e.functionals) p.traces.push_back(szego_remainder(op, s, f));
  } else {
    if (!projection) throw UnsupportedError("variance-only sweep needs a projection symbol");
    if (e.omega.dimension() == 1 && !e.omega.factors[0].fractal() &&
        e.omega.factors[0].materialize().size() == 1) {
      const ToeplitzOverlap t = toeplitz_overlap(e.omega.factors[0].materialize(), e.symbol.factor(0),
                                                 lambda, e.mode, e.assemble.nodes_per_oscillation);
      p.n = t.n;
      p.route = "toeplitz";
      p.variance = t.hs_direct();
      p.particle_number = t.trace();
    } else {
      AssembleOptions opt = e.assemble;
      opt.dense = false;
      const OverlapOperator op = assemble(e.omega, e.symbol, lambda, e.mode, opt);
      p.n = op.size();
      p.route = "trace-identity";
      p.variance = hs_cross_norm_direct(op);
      double tr = 1.0;
      for (const auto& f : op.factors()) tr *= f.trace();
      p.particle_number = tr;
    }
  }
  p.ok = true;
  return p;
}

SweepResult sweep(const Experiment& e) {
  std::vector<double> grid = e.lambdas;
  if (grid.empty()) throw DomainError("sweep: empty lambda grid");
  std::sort(grid.begin(), grid.end());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= e.lambda_floor))
      throw DomainError("sweep: lambda " + std::to_string(grid[i]) + " below the floor " +
                        std::to_string(e.lambda_floor));
    if (i && grid[i] == grid[i - 1]) throw DomainError("sweep: duplicate lambda");
  }

  SweepResult r;
  r.omega_descriptor = describe(e.omega);
  r.symbol_descriptor = describe(e.symbol);
  r.points.resize(grid.size());

  // Largest lambda first so the slowest jobs start early; each job writes
  // only its own slot, so the result does not depend on scheduling.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= grid.size()) return;
      const std::size_t i = grid.size() - 1 - k;
      try {
        r.points[i] = run_point(e, grid[i]);
      } catch (const std::exception& ex) {
        SweepPoint p;
        p.lambda = grid[i];
        p.error = ex.what();
        r.points[i] = std::move(p);
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(e.parallelism, unsigned(grid.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& p : r.points)
    if (!p.ok) ++r.failures;
  if (double(r.failures) > 0.2 * double(grid.size())) {
    std::string first;
    for (const auto& p : r.points)
      if (!p.ok) {
        first = "lambda=" + std::to_string(p.lambda) + ": " + p.error;
        break;
      }
    throw NumericalError("sweep aborted: " + std::to_string(r.failures) + " of " +
                         std::to_string(grid.size()) + " lambdas failed (" + first + ")");
  }
  return r;
}

std::vector<double> SweepResult::lambdas() const {
  std::vector<double> v;
  for (const auto& p : points)
    if (p.ok) v.push_back(p.lambda);
  return v;
}

std::vector<double> SweepResult::values(Quantity q) const {
  std::vector<double> v;
  for (const auto& p : points) {
    if (!p.ok) continue;
    switch (q) {
      case Quantity::entropy: v.push_back(p.entropy); break;
      case Quantity::variance: v.push_back(p.variance); break;
      case Quantity::particle_number: v.push_back(p.particle_number); break;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------

namespace {

struct LinearFit {
  double a = 0.0, b = 0.0;
  double rss = 0.0;
  double grad = 0.0;  // d rss / dp at fixed coefficients
};

/// Weighted least squares of y on (lambda^p log2 lambda, lambda^p) by
/// Gram-Schmidt on the two columns.
LinearFit solve_basis(std::span<const double> lambda, std::span<const double> y, double p) {
  const std::size_t n = y.size();
  std::vector<double> u(n), v(n), t(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = y[i] != 0.0 ? 1.0 / std::abs(y[i]) : 1.0;
    const double lp = std::pow(lambda[i], p);
    u[i] = w[i] * lp * std::log2(lambda[i]);
    v[i] = w[i] * lp;
    t[i] = w[i] * y[i];
  }
  auto dot = [&](const std::vector<double>& x, const std::vector<double>& z) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * z[i];
    return s;
  };
  // q1 = v / |v|, q2 = orthonormalized u.
  const double nv = std::sqrt(dot(v, v));
  if (!(nv > 0.0)) throw FitError("power-log fit: singular design");
  std::vector<double> q1(n), q2(n);
  for (std::size_t i = 0; i < n; ++i) q1[i] = v[i] / nv;
  const double r12 = dot(q1, u);
  for (std::size_t i = 0; i < n; ++i) q2[i] = u[i] - r12 * q1[i];
  const double r22 = std::sqrt(dot(q2, q2));
  if (!(r22 > 1e-12 * std::sqrt(dot(u, u))))
    throw FitError("power-log fit: singular design (basis functions are collinear on this grid)");
  for (auto& x : q2) x /= r22;
  const double c1 = dot(q1, t), c2 = dot(q2, t);
  LinearFit f;
  f.a = c2 / r22;
  f.b = (c1 - r12 * f.a) / nv;
  for (std::size_t i = 0; i < n; ++i) {
    const double model = f.a * u[i] + f.b * v[i];
    const double r = t[i] - model;
    f.rss += r * r;
    f.grad += -2.0 * r * std::log(lambda[i]) * model;
  }
  return f;
}

void check_series(std::span<const double> lambda, std::span<const double> y, std::size_t min_points) {
  if (lambda.size() != y.size()) throw FitError("fit: lambda and value counts differ");
  if (lambda.size() < min_points)
    throw FitError("fit: need at least " + std::to_string(min_points) + " points, got " +
                   std::to_string(lambda.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(lambda[i] > 0.0) || !std::isfinite(y[i])) throw FitError("fit: invalid data point");
    if (i && !(lambda[i] > lambda[i - 1])) throw FitError("fit: lambdas must increase strictly");
  }
}

double half_range(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return 0.5 * (*hi - *lo);
}

}  // namespace

std::vector<double> local_exponents(std::span<const double> lambda, std::span<const double> y) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    if (!(y[i] > 0.0) || !(y[i + 1] > 0.0)) throw FitError("local exponents: nonpositive value");
    out.push_back(std::log(y[i + 1] / y[i]) / std::log(lambda[i + 1] / lambda[i]));
  }
  return out;
}

std::vector<double> successive_differences(std::span<const double> y) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) out.push_back(y[i + 1] - y[i]);
  return out;
}

ScalingFit fit_power_log(std::span<const double> lambda, std::span<const double> y,
                         std::optional<double> p_fixed, std::pair<double, double> p_range) {
  check_series(lambda, y, 4);
  ScalingFit fit;
  fit.model = FitModel::power_log;
  const auto n = double(y.size());

  double p = 0.0;
  if (p_fixed) {
    p = *p_fixed;
  } else {
    if (!(p_range.second > p_range.first)) throw FitError("power-log fit: empty exponent range");
    // Coarse scan of the projected residual, then the root of its derivative.
    const int steps = 600;
    const double h = (p_range.second - p_range.first) / steps;
    int best = 0;
    double best_rss = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= steps; ++k) {
      const double rss = solve_basis(lambda, y, p_range.first + k * h).rss;
      if (rss < best_rss) {
        best_rss = rss;
        best = k;
      }
    }
    p = p_range.first + best * h;
    const double lo = std::max(p_range.first, p - h), hi = std::min(p_range.second, p + h);
    auto g = [&](double x) { return solve_basis(lambda, y, x).grad; };
    const double glo = g(lo), ghi = g(hi);
    if (glo < 0.0 && ghi > 0.0) {
      std::uintmax_t iters = 200;
      const auto r = boost::math::tools::toms748_solve(
          g, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(52), iters);
      p = 0.5 * (r.first + r.second);
    }
    // The log term makes the residual very flat in p when the data is a
    // pure power; the mean local exponent is then the better candidate.
    bool positive = std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; });
    if (positive) {
      const auto le = local_exponents(lambda, y);
      double mean = 0.0;
      for (double x : le) mean += x;
      mean /= double(le.size());
      if (mean >= p_range.first && mean <= p_range.second &&
          solve_basis(lambda, y, mean).rss < solve_basis(lambda, y, p).rss)
        p = mean;
    }
  }

  const LinearFit f = solve_basis(lambda, y, p);
  fit.exponent = p;
  fit.coeff_a = f.a;
  fit.coeff_b = f.b;
  fit.rms_residual = std::sqrt(f.rss / n);
  if (std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; }))
    fit.exponent_half_range = half_range(local_exponents(lambda, y));
  return fit;
}

ScalingFit fit_pure_power(std::span<const double> lambda, std::span<const double> y) {
  check_series(lambda, y, 2);
  ScalingFit fit;
  fit.model = FitModel::pure_power;
  const std::size_t n = y.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0.0)) throw FitError("pure-power fit: values must be positive");
    mx += std::log(lambda[i]);
    my += std::log(y[i]);
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(lambda[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  fit.exponent = sxy / sxx;
  fit.coeff_b = std::exp(my - fit.exponent * mx);
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::log(y[i]) - (my + fit.exponent * (std::log(lambda[i]) - mx));
    rss += r * r;
  }
  fit.rms_residual = std::sqrt(rss / double(n));
  fit.exponent_half_range = half_range(local_exponents(lambda, y));
  return fit;
}

// ---------------------------------------------------------------------------

WidomCoefficient widom_coefficient(const RegionSpec& omega, const RegionSpec& gamma) {
  if (omega.dimension() != gamma.dimension())
    throw DimensionError("widom_coefficient: region dimensions differ");
  if (omega.fractal() || gamma.fractal())
    throw UnsupportedError("widom_coefficient: fractal boundaries have no face decomposition");
  const std::size_t d = omega.dimension();
  std::vector<IntervalUnion> om, ga;
  for (std::size_t j = 0; j < d; ++j) {
    om.push_back(omega.factors[j].materialize());
    ga.push_back(gamma.factor_intervals(j));
  }
  const double scale = std::pow(2.0 * std::numbers::pi, 1.0 - double(d)) / 12.0;

  WidomCoefficient w;
  double total = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    // A face orthogonal to axis j has the cross-section of the other factors.
    double area_o = 1.0, area_g = 1.0;
    for (std::size_t i = 0; i < d; ++i)
      if (i != j) {
        area_o *= om[i].measure();
        area_g *= ga[i].measure();
      }
    std::vector<double> fo, fg;
    for (const auto& i : om[j].intervals()) fo.insert(fo.end(), {i.lo, i.hi});
    for (const auto& i : ga[j].intervals()) fg.insert(fg.end(), {i.lo, i.hi});
    for (double xo : fo)
      for (double xg : fg) {
        FacePair fp{j, xo, xg, area_o, area_g, scale * area_o * area_g};
        total += fp.contribution;
        w.face_pairs.push_back(fp);
      }
  }
  w.value = total;
  return w;
}

// ---------------------------------------------------------------------------

SandwichReport check_sandwich(const SweepResult& sweep_d, const SweepResult& sweep_1, std::size_t d,
                              const SandwichOptions& opt) {
  const auto ld = sweep_d.lambdas(), l1 = sweep_1.lambdas();
  if (ld != l1) throw DimensionError("check_sandwich: lambda grids differ");
  if (d < 1) throw DomainError("check_sandwich: d must be >= 1");
  const auto sd = sweep_d.values(Quantity::entropy), s1 = sweep_1.values(Quantity::entropy);

  SandwichReport rep;
  rep.d = d;
  rep.slack = opt.slack;
  rep.min_lambda = opt.min_lambda;
  std::size_t counted = 0, ok_n = 0, ok_l = 0;
  const double dm1 = double(d) - 1.0;
  for (std::size_t i = 0; i < ld.size(); ++i) {
    SandwichRow r;
    r.lambda = ld[i];
    r.s_d = sd[i];
    r.s_1 = s1[i];
    r.prefactor_literal = std::pow(ld[i] / (2.0 * std::numbers::pi), dm1);
    r.prefactor_normalized = std::pow(ld[i] * opt.gamma_measure / (2.0 * std::numbers::pi), dm1);
    auto within = [&](double pref) {
      const double base = pref * r.s_1;
      if (base == 0.0) return r.s_d <= 1e-12;
      return r.s_d >= 0.5 * base * (1.0 - opt.slack) && r.s_d <= double(d) * base * (1.0 + opt.slack);
    };
    r.ratio_literal = r.s_1 > 0 ? r.s_d / (r.prefactor_literal * r.s_1) : 0.0;
    r.ratio_normalized = r.s_1 > 0 ? r.s_d / (r.prefactor_normalized * r.s_1) : 0.0;
    r.pass_literal = within(r.prefactor_literal);
    r.pass_normalized = within(r.prefactor_normalized);
    r.gated = r.lambda < opt.min_lambda;
    if (!r.gated) {
      ++counted;
      ok_n += r.pass_normalized;
      ok_l += r.pass_literal;
    }
    rep.rows.push_back(r);
  }
  rep.pass_fraction_normalized = counted ? double(ok_n) / double(counted) : 1.0;
  rep.pass_fraction_literal = counted ? double(ok_l) / double(counted) : 1.0;
  rep.pass = ok_n == counted;
  return rep;
}

EntropyVarianceReport check_entropy_variance(const SweepResult& entropy_sweep,
                                             const SweepResult& variance_sweep) {
  const auto le = entropy_sweep.lambdas(), lv = variance_sweep.lambdas();
  if (le != lv) throw DimensionError("check_entropy_variance: lambda grids differ");
  const auto s = entropy_sweep.values(Quantity::entropy);
  const auto v = variance_sweep.values(Quantity::variance);
  EntropyVarianceReport rep;
  rep.lower_bound_holds = true;
  for (std::size_t i = 0; i < le.size(); ++i) {
    EntropyVarianceRow r;
    r.lambda = le[i];
    r.entropy = s[i];
    r.variance = v[i];
    // Pointwise h(t) >= 4t(1-t); only summation rounding is forgiven.
    r.lower_ok = r.entropy >= 4.0 * r.variance - 1e-13 * std::max(1.0, r.entropy);
    rep.lower_bound_holds = rep.lower_bound_holds && r.lower_ok;
    if (r.lambda >= 4.0 && r.variance > 0.0) {
      r.ratio = r.entropy / (std::log2(r.lambda) * r.variance);
      rep.fitted_c = std::max(rep.fitted_c, r.ratio);
    }
    rep.rows.push_back(r);
  }
  return rep;
}

}  // namespace szego
