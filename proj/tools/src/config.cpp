#include "szego_cli/config.hpp"

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "szego/error.hpp"

namespace szego::cli {

namespace {

using nlohmann::json;

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.contains(k)) throw ConfigError(path.empty() ? k : path + "." + k, "unknown key");
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<int>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

double beta_value(const json& j, const std::string& path) {
  const double b = number(j, path);
  if (!(b > 0.0 && b < 1.0)) throw ConfigError(path, "beta must lie in (0,1), got " + j.dump());
  return b;
}

// {"intervals": [[lo,hi],...]} or {"cantor": {"beta", "depth", "scale", "shift"}}
CompositeSet set_factor(const json& j, const std::string& path) {
  allow_keys(j, path, {"intervals", "cantor"});
  if (j.contains("intervals") == j.contains("cantor"))
    throw ConfigError(path, "give exactly one of \"intervals\" or \"cantor\"");
  try {
    if (j.contains("intervals")) {
      const json& a = j["intervals"];
      if (!a.is_array() || a.empty()) throw ConfigError(path + ".intervals", "expected [[lo, hi], ...]");
      return CompositeSet(interval_union_from_json(a.dump()));
    }
    const json& c = j["cantor"];
    const std::string cp = path + ".cantor";
    allow_keys(c, cp, {"beta", "depth", "scale", "shift"});
    if (!c.contains("beta")) throw ConfigError(cp + ".beta", "required");
    const double beta = beta_value(c["beta"], cp + ".beta");
    const CantorParams p = c.contains("depth") ? cantor_params_from_beta(beta, integer(c["depth"], cp + ".depth"))
                                               : cantor_params_from_beta(beta);
    CompositeSet s = cantor_composite(p);
    if (c.contains("scale")) s = s.scaled(number(c["scale"], cp + ".scale"));
    if (c.contains("shift")) s = s.translated(number(c["shift"], cp + ".shift"));
    return s;
  } catch (const szego::Error& e) {
    throw ConfigError(path, e.what());
  }
}

std::vector<CompositeSet> cube_factors(const json& j, const std::string& path) {
  allow_keys(j, path, {"d", "lo", "hi"});
  for (const char* k : {"d", "lo", "hi"})
    if (!j.contains(k)) throw ConfigError(path + "." + k, "required");
  const int d = integer(j["d"], path + ".d");
  if (d < 1) throw ConfigError(path + ".d", "dimension must be >= 1");
  const double lo = number(j["lo"], path + ".lo"), hi = number(j["hi"], path + ".hi");
  if (!(lo < hi)) throw ConfigError(path, "need lo < hi");
  return std::vector<CompositeSet>(std::size_t(d), CompositeSet::interval(lo, hi));
}

AngularUnit unit_value(const json& j, const std::string& path) {
  const std::string u = string(j, path);
  if (u == "radians") return AngularUnit::radians;
  if (u == "cycles") return AngularUnit::cycles;
  throw ConfigError(path, "expected \"radians\" or \"cycles\"");
}

RegionSpec region(const json& j, Mode mode) {
  allow_keys(j, "region", {"factors", "cube"});
  if (j.contains("factors") == j.contains("cube"))
    throw ConfigError("region", "give exactly one of \"factors\" or \"cube\"");
  std::vector<CompositeSet> f;
  if (j.contains("cube")) {
    f = cube_factors(j["cube"], "region.cube");
  } else {
    if (!j["factors"].is_array() || j["factors"].empty())
      throw ConfigError("region.factors", "expected a non-empty array");
    for (std::size_t i = 0; i < j["factors"].size(); ++i)
      f.push_back(set_factor(j["factors"][i], "region.factors[" + std::to_string(i) + "]"));
  }
  try {
    return RegionSpec(std::move(f), mode);
  } catch (const szego::Error& e) {
    throw ConfigError("region", e.what());
  }
}

StepSymbol1D symbol_factor(const json& j, const std::string& path) {
  if (j.is_object() && j.contains("steps")) {
    allow_keys(j, path, {"steps"});
    const json& s = j["steps"];
    if (!s.is_array() || s.empty()) throw ConfigError(path + ".steps", "expected a non-empty array");
    std::vector<SymbolPiece> pieces;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string sp = path + ".steps[" + std::to_string(i) + "]";
      allow_keys(s[i], sp, {"set", "value"});
      if (!s[i].contains("set")) throw ConfigError(sp + ".set", "required");
      if (!s[i].contains("value")) throw ConfigError(sp + ".value", "required");
      pieces.push_back({set_factor(s[i]["set"], sp + ".set"), number(s[i]["value"], sp + ".value")});
    }
    try {
      return StepSymbol1D(std::move(pieces));
    } catch (const szego::Error& e) {
      throw ConfigError(path, e.what());
    }
  }
  return StepSymbol1D::indicator(set_factor(j, path));
}

StepSymbol symbol(const json& j) {
  allow_keys(j, "symbol", {"factors", "cube", "unit"});
  if (j.contains("factors") == j.contains("cube"))
    throw ConfigError("symbol", "give exactly one of \"factors\" or \"cube\"");
  const AngularUnit unit = j.contains("unit") ? unit_value(j["unit"], "symbol.unit") : AngularUnit::radians;
  std::vector<StepSymbol1D> f;
  if (j.contains("cube")) {
    for (const auto& c : cube_factors(j["cube"], "symbol.cube")) f.push_back(StepSymbol1D::indicator(c));
  } else {
    if (!j["factors"].is_array() || j["factors"].empty())
      throw ConfigError("symbol.factors", "expected a non-empty array");
    for (std::size_t i = 0; i < j["factors"].size(); ++i)
      f.push_back(symbol_factor(j["factors"][i], "symbol.factors[" + std::to_string(i) + "]"));
  }
  try {
    return StepSymbol(std::move(f), unit);
  } catch (const szego::Error& e) {
    throw ConfigError("symbol", e.what());
  }
}

std::vector<double> lambda_grid(const json& j) {
  allow_keys(j, "lambda", {"min", "max", "points_per_octave", "values"});
  std::vector<double> grid;
  if (j.contains("values")) {
    if (j.contains("min") || j.contains("max") || j.contains("points_per_octave"))
      throw ConfigError("lambda", "\"values\" excludes min/max/points_per_octave");
    if (!j["values"].is_array() || j["values"].empty())
      throw ConfigError("lambda.values", "expected a non-empty array");
    for (std::size_t i = 0; i < j["values"].size(); ++i)
      grid.push_back(number(j["values"][i], "lambda.values[" + std::to_string(i) + "]"));
    std::sort(grid.begin(), grid.end());
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (grid[i] == grid[i - 1]) throw ConfigError("lambda.values", "duplicate value");
  } else {
    if (!j.contains("min")) throw ConfigError("lambda.min", "required");
    const double lo = number(j["min"], "lambda.min");
    const double hi = j.contains("max") ? number(j["max"], "lambda.max") : lo;
    const int ppo = j.contains("points_per_octave") ? integer(j["points_per_octave"], "lambda.points_per_octave") : 1;
    if (ppo < 1) throw ConfigError("lambda.points_per_octave", "must be >= 1");
    if (!(hi >= lo)) throw ConfigError("lambda.max", "must be >= lambda.min");
    if (lo >= 2.0) grid = dyadic_grid(lo, hi, ppo);
    else grid = {lo};
  }
  if (!(grid.front() >= 2.0))
    throw ConfigError(j.contains("values") ? "lambda.values" : "lambda.min",
                      "lambda must be >= 2, got " + std::to_string(grid.front()));
  return grid;
}

Functional functional(const json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "entropy_h") return Functional::entropy_h();
    if (s.rfind("power:", 0) == 0) {
      try {
        std::size_t used = 0;
        const int m = std::stoi(s.substr(6), &used);
        if (used == s.size() - 6 && m >= 0) return Functional::power(m);
      } catch (const std::exception&) {
      }
      throw ConfigError(path, "power:<m> needs an integer m >= 0");
    }
    throw ConfigError(path, "unknown functional \"" + s + "\" (entropy_h, power:<m>, {\"table\": ...})");
  }
  allow_keys(j, path, {"table"});
  const json& t = j["table"];
  if (!t.is_array()) throw ConfigError(path + ".table", "expected [[t, f], ...]");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::string tp = path + ".table[" + std::to_string(i) + "]";
    if (!t[i].is_array() || t[i].size() != 2) throw ConfigError(tp, "expected [t, f]");
    pts.emplace_back(number(t[i][0], tp), number(t[i][1], tp));
  }
  try {
    return Functional::table(std::move(pts));
  } catch (const szego::Error& e) {
    throw ConfigError(path + ".table", e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  allow_keys(j, "", {"schema_version", "description", "mode", "region", "symbol", "lambda", "functionals",
                     "variance_only", "fit", "outputs", "checks", "parallelism", "memory_budget",
                     "tolerances", "fractal", "verify"});
  if (!j.contains("schema_version")) throw ConfigError("schema_version", "required");
  if (integer(j["schema_version"], "schema_version") != kSchemaVersion)
    throw ConfigError("schema_version", "unsupported version " + j["schema_version"].dump() +
                                            " (expected " + std::to_string(kSchemaVersion) + ")");
  ExperimentConfig c;
  c.source = j;
  if (j.contains("description")) string(j["description"], "description");

  if (j.contains("mode")) {
    const std::string m = string(j["mode"], "mode");
    try {
      c.mode = mode_from_string(m);
    } catch (const szego::Error&) {
      throw ConfigError("mode", "expected \"lattice\" or \"nystrom\", got \"" + m + "\"");
    }
  }

  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    allow_keys(t, "tolerances", {"nodes_per_oscillation", "quadrature_rel_tol", "sandwich_slack",
                                 "sandwich_min_lambda", "hs_agreement"});
    if (t.contains("nodes_per_oscillation")) {
      c.tol.nodes_per_oscillation = integer(t["nodes_per_oscillation"], "tolerances.nodes_per_oscillation");
      if (c.tol.nodes_per_oscillation < 8)
        throw ConfigError("tolerances.nodes_per_oscillation", "must be >= 8");
    }
    auto positive = [&](const char* k, double& dst) {
      if (!t.contains(k)) return;
      dst = number(t[k], std::string("tolerances.") + k);
      if (!(dst > 0.0)) throw ConfigError(std::string("tolerances.") + k, "must be > 0");
    };
    positive("quadrature_rel_tol", c.tol.quadrature_rel_tol);
    positive("sandwich_slack", c.tol.sandwich_slack);
    positive("sandwich_min_lambda", c.tol.sandwich_min_lambda);
    positive("hs_agreement", c.tol.hs_agreement);
  }

  if (j.contains("region")) c.region = region(j["region"], c.mode);
  if (j.contains("symbol")) c.symbol = symbol(j["symbol"]);
  if (c.region && c.symbol && c.region->dimension() != c.symbol->dimension())
    throw ConfigError("symbol", "dimension " + std::to_string(c.symbol->dimension()) +
                                    " differs from region dimension " + std::to_string(c.region->dimension()));
  if (j.contains("lambda")) c.lambdas = lambda_grid(j["lambda"]);

  if (j.contains("functionals")) {
    if (!j["functionals"].is_array()) throw ConfigError("functionals", "expected an array");
    for (std::size_t i = 0; i < j["functionals"].size(); ++i)
      c.functionals.push_back(functional(j["functionals"][i], "functionals[" + std::to_string(i) + "]"));
  }
  if (j.contains("variance_only")) c.variance_only = boolean(j["variance_only"], "variance_only");
  if (j.contains("fit")) {
    allow_keys(j["fit"], "fit", {"p_fixed"});
    if (j["fit"].contains("p_fixed")) c.p_fixed = number(j["fit"]["p_fixed"], "fit.p_fixed");
  }
  if (j.contains("outputs")) {
    allow_keys(j["outputs"], "outputs", {"svg"});
    if (j["outputs"].contains("svg")) c.svg = boolean(j["outputs"]["svg"], "outputs.svg");
  }
  if (j.contains("checks")) {
    allow_keys(j["checks"], "checks", {"sandwich"});
    if (j["checks"].contains("sandwich")) c.sandwich = boolean(j["checks"]["sandwich"], "checks.sandwich");
  }
  if (j.contains("parallelism")) {
    const int p = integer(j["parallelism"], "parallelism");
    if (p < 1) throw ConfigError("parallelism", "must be >= 1");
    c.parallelism = unsigned(p);
  }
  if (j.contains("memory_budget")) {
    c.memory_budget_entries = number(j["memory_budget"], "memory_budget");
    if (!(c.memory_budget_entries >= 1.0)) throw ConfigError("memory_budget", "must be >= 1 entry");
  }

  if (j.contains("fractal")) {
    const json& f = j["fractal"];
    allow_keys(f, "fractal", {"betas", "depth", "tail_window", "tail_points"});
    if (!f.contains("betas")) throw ConfigError("fractal.betas", "required");
    if (!f["betas"].is_array()) throw ConfigError("fractal.betas", "expected an array");
    if (f["betas"].empty()) throw ConfigError("fractal.betas", "empty beta list");
    for (std::size_t i = 0; i < f["betas"].size(); ++i)
      c.fractal.betas.push_back(beta_value(f["betas"][i], "fractal.betas[" + std::to_string(i) + "]"));
    if (f.contains("depth")) {
      c.fractal.depth = integer(f["depth"], "fractal.depth");
      if (*c.fractal.depth < 1) throw ConfigError("fractal.depth", "must be >= 1");
    }
    if (f.contains("tail_window")) {
      const json& w = f["tail_window"];
      if (!w.is_array() || w.size() != 2) throw ConfigError("fractal.tail_window", "expected [lo, hi]");
      c.fractal.tail_window = {number(w[0], "fractal.tail_window[0]"), number(w[1], "fractal.tail_window[1]")};
      if (!(c.fractal.tail_window.first >= 1.0 && c.fractal.tail_window.second > c.fractal.tail_window.first))
        throw ConfigError("fractal.tail_window", "need 1 <= lo < hi");
    }
    if (f.contains("tail_points")) {
      c.fractal.tail_points = integer(f["tail_points"], "fractal.tail_points");
      if (c.fractal.tail_points < 4) throw ConfigError("fractal.tail_points", "must be >= 4");
    }
  }

  if (j.contains("verify")) {
    const json& v = j["verify"];
    allow_keys(v, "verify", {"suite", "inject_asymmetry"});
    if (v.contains("suite")) {
      const std::string s = string(v["suite"], "verify.suite");
      if (s == "lattice_only") c.verify.lattice_only = true;
      else if (s != "default") throw ConfigError("verify.suite", "expected \"default\" or \"lattice_only\"");
    }
    if (v.contains("inject_asymmetry"))
      c.verify.inject_asymmetry = boolean(v["inject_asymmetry"], "verify.inject_asymmetry");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

Experiment to_experiment(const ExperimentConfig& c) {
  if (!c.region) throw ConfigError("region", "required for this subcommand");
  if (!c.symbol) throw ConfigError("symbol", "required for this subcommand");
  if (c.lambdas.empty()) throw ConfigError("lambda", "required for this subcommand");
  Experiment e;
  e.omega = *c.region;
  e.symbol = *c.symbol;
  e.mode = c.mode;
  e.lambdas = c.lambdas;
  e.assemble.nodes_per_oscillation = c.tol.nodes_per_oscillation;
  e.assemble.memory_budget_entries = c.memory_budget_entries;
  e.need_spectrum = !c.variance_only;
  e.functionals = c.functionals;
  e.parallelism = c.parallelism;
  if (c.variance_only && !c.functionals.empty())
    throw ConfigError("variance_only", "cannot be combined with functionals (they need the spectrum)");
  if (c.variance_only && !c.symbol->is_projection())
    throw ConfigError("variance_only", "needs a projection symbol");
  return e;
}

}  // namespace szego::cli
