#include "cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "crackfreq/errors.hpp"

namespace crackfreq::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

Schedule read_schedule(const json& obj, Schedule s, const std::string& where) {
  reject_unknown(obj, {"first", "ratio", "count"}, where);
  read(obj, "first", s.first, where);
  read(obj, "ratio", s.ratio, where);
  read(obj, "count", s.count, where);
  return s;
}

json schedule_json(const Schedule& s) { return {{"first", s.first}, {"ratio", s.ratio}, {"count", s.count}}; }

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::exact_harmonic: return "exact_harmonic";
    case Scenario::exact_bessel: return "exact_bessel";
    case Scenario::fem_constant_potential: return "fem_constant_potential";
    case Scenario::fem_radial_potential: return "fem_radial_potential";
    case Scenario::sphere_spectrum: return "sphere_spectrum";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& s) {
  for (Scenario v : {Scenario::exact_harmonic, Scenario::exact_bessel, Scenario::fem_constant_potential,
                     Scenario::fem_radial_potential, Scenario::sphere_spectrum})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown scenario '" + s + "'");
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(root,
                 {"scenario", "k", "amplitude", "potential", "mesh", "radii", "lambdas", "alpha_radii", "eigen_count",
                  "fourier_kmax", "seed", "output", "tolerances"},
                 "config");
  RunConfig cfg;
  if (!root.contains("scenario")) throw ConfigError("config: missing 'scenario'");
  std::string scenario;
  read(root, "scenario", scenario, "config");
  cfg.scenario = scenario_from_string(scenario);
  read(root, "k", cfg.k, "config");
  read(root, "amplitude", cfg.amplitude, "config");
  read(root, "alpha_radii", cfg.alpha_radii, "config");
  read(root, "eigen_count", cfg.eigen_count, "config");
  read(root, "fourier_kmax", cfg.fourier_kmax, "config");
  read(root, "seed", cfg.seed, "config");
  read(root, "output", cfg.output, "config");
  if (root.contains("potential")) {
    const json& p = root["potential"];
    reject_unknown(p, {"c", "epsilon", "hypothesis"}, "potential");
    read(p, "c", cfg.potential.c, "potential");
    read(p, "epsilon", cfg.potential.epsilon, "potential");
    read(p, "hypothesis", cfg.potential.hypothesis, "potential");
  }
  if (root.contains("mesh")) {
    const json& m = root["mesh"];
    reject_unknown(m, {"radius", "base_resolution", "levels", "grading_ratio"}, "mesh");
    read(m, "radius", cfg.mesh.radius, "mesh");
    read(m, "base_resolution", cfg.mesh.base_resolution, "mesh");
    read(m, "levels", cfg.mesh.levels, "mesh");
    read(m, "grading_ratio", cfg.mesh.grading_ratio, "mesh");
  }
  if (root.contains("radii")) cfg.radii = read_schedule(root["radii"], cfg.radii, "radii");
  if (root.contains("lambdas")) cfg.lambdas = read_schedule(root["lambdas"], cfg.lambdas, "lambdas");
  if (root.contains("tolerances")) {
    const json& t = root["tolerances"];
    reject_unknown(t,
                   {"gamma", "exact_gamma", "monotonicity_slack", "l2_relative", "alpha_spread", "alpha_value",
                    "spectrum", "parseval", "normalization", "doubling"},
                   "tolerances");
    auto& tol = cfg.tolerances;
    read(t, "gamma", tol.gamma, "tolerances");
    read(t, "exact_gamma", tol.exact_gamma, "tolerances");
    read(t, "monotonicity_slack", tol.monotonicity_slack, "tolerances");
    read(t, "l2_relative", tol.l2_relative, "tolerances");
    read(t, "alpha_spread", tol.alpha_spread, "tolerances");
    read(t, "alpha_value", tol.alpha_value, "tolerances");
    read(t, "spectrum", tol.spectrum, "tolerances");
    read(t, "parseval", tol.parseval, "tolerances");
    read(t, "normalization", tol.normalization, "tolerances");
    read(t, "doubling", tol.doubling, "tolerances");
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["scenario"] = to_string(cfg.scenario);
  j["k"] = cfg.k;
  j["amplitude"] = cfg.amplitude;
  j["potential"] = {{"c", cfg.potential.c}, {"epsilon", cfg.potential.epsilon},
                    {"hypothesis", cfg.potential.hypothesis}};
  j["mesh"] = {{"radius", cfg.mesh.radius},
               {"base_resolution", cfg.mesh.base_resolution},
               {"levels", cfg.mesh.levels},
               {"grading_ratio", cfg.mesh.grading_ratio}};
  j["radii"] = schedule_json(cfg.radii);
  j["lambdas"] = schedule_json(cfg.lambdas);
  j["alpha_radii"] = cfg.alpha_radii;
  j["eigen_count"] = cfg.eigen_count;
  j["fourier_kmax"] = cfg.fourier_kmax;
  j["seed"] = cfg.seed;
  j["output"] = cfg.output;
  const auto& t = cfg.tolerances;
  j["tolerances"] = {{"gamma", t.gamma},
                     {"exact_gamma", t.exact_gamma},
                     {"monotonicity_slack", t.monotonicity_slack},
                     {"l2_relative", t.l2_relative},
                     {"alpha_spread", t.alpha_spread},
                     {"alpha_value", t.alpha_value},
                     {"spectrum", t.spectrum},
                     {"parseval", t.parseval},
                     {"normalization", t.normalization},
                     {"doubling", t.doubling}};
  return j;
}

void validate(const RunConfig& cfg) {
  if (cfg.k < 0) throw ConfigError("k must be >= 0");
  if (!std::isfinite(cfg.amplitude) || cfg.amplitude == 0.0) throw ConfigError("amplitude must be finite and nonzero");
  if (!(cfg.potential.epsilon > 0.0 && cfg.potential.epsilon < 1.0))
    throw ConfigError("potential.epsilon must lie in (0, 1)");
  if (cfg.potential.hypothesis != "H1" && cfg.potential.hypothesis != "H2")
    throw ConfigError("potential.hypothesis must be H1 or H2");
  if (!(cfg.mesh.radius > 0.0 && cfg.mesh.radius <= 1.0)) throw ConfigError("mesh.radius must lie in (0, 1]");
  if (cfg.mesh.base_resolution < 8) throw ConfigError("mesh.base_resolution must be >= 8");
  if (cfg.mesh.levels < 0) throw ConfigError("mesh.levels must be >= 0");
  if (!(cfg.mesh.grading_ratio > 0.1 && cfg.mesh.grading_ratio < 0.9))
    throw ConfigError("mesh.grading_ratio must lie in (0.1, 0.9)");
  auto check_schedule = [&](const Schedule& s, const char* name, int min_count) {
    if (!(s.first > 0.0 && s.first < cfg.mesh.radius)) throw ConfigError(std::string(name) + ".first must lie in (0, R)");
    if (!(s.ratio > 0.0 && s.ratio < 1.0)) throw ConfigError(std::string(name) + ".ratio must lie in (0, 1)");
    if (s.count < min_count) throw ConfigError(std::string(name) + ".count must be >= " + std::to_string(min_count));
  };
  check_schedule(cfg.radii, "radii", 10);
  check_schedule(cfg.lambdas, "lambdas", 6);
  if (cfg.alpha_radii.empty()) throw ConfigError("alpha_radii must not be empty");
  for (double r : cfg.alpha_radii)
    if (!(r > 0.0 && r < cfg.mesh.radius)) throw ConfigError("alpha_radii must lie in (0, R)");
  if (cfg.eigen_count < 1 || cfg.eigen_count > 12) throw ConfigError("eigen_count must lie in [1, 12]");
  if (cfg.fourier_kmax < cfg.k) throw ConfigError("fourier_kmax must be >= k");
  if (cfg.output.empty()) throw ConfigError("output must not be empty");
}

std::vector<double> expand(const Schedule& s, bool ascending) {
  std::vector<double> out;
  double v = s.first;
  for (int i = 0; i < s.count; ++i, v *= s.ratio) out.push_back(v);
  if (ascending) std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace crackfreq::cli
