#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace crackfreq::cli {

enum class Scenario { exact_harmonic, exact_bessel, fem_constant_potential, fem_radial_potential, sphere_spectrum };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct MeshConfig {
  double radius = 1.0;
  int base_resolution = 64;
  int levels = 8;
  double grading_ratio = 0.5;
};

struct PotentialConfig {
  double c = 1.0;
  double epsilon = 0.5;
  std::string hypothesis = "H1";
};

struct Schedule {
  double first = 0.0;
  double ratio = 0.0;
  int count = 0;
};

struct Tolerances {
  double gamma = 0.05;
  double exact_gamma = 1e-6;
  double monotonicity_slack = 1e-3;
  double l2_relative = 0.015;
  double alpha_spread = 0.05;
  double alpha_value = 0.02;
  double spectrum = 0.03;
  double parseval = 0.01;
  double normalization = 1e-3;
  double doubling = 1e-8;
};

/// Everything one run needs. Units: lengths in the reference disk's units,
/// angles in radians; all other quantities are dimensionless.
struct RunConfig {
  Scenario scenario = Scenario::exact_harmonic;
  int k = 1;
  double amplitude = 1.0;
  PotentialConfig potential;
  MeshConfig mesh;
  /// Frequency radii: first * ratio^j, j < count, sorted ascending.
  Schedule radii{0.8, 0.8, 18};
  Schedule lambdas{0.4, 0.5, 6};
  std::vector<double> alpha_radii{0.1, 0.2, 0.4};
  int eigen_count = 12;
  int fourier_kmax = 8;
  std::uint64_t seed = 20240917;
  std::string output = "run";
  Tolerances tolerances;
};

/// Parses the structured-text (JSON) config. Unknown keys anywhere are
/// rejected. Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
nlohmann::ordered_json config_to_json(const RunConfig& cfg);
/// Throws ConfigError on invariant violations (eps in (0, 1), R <= 1, ...).
void validate(const RunConfig& cfg);

std::vector<double> expand(const Schedule& s, bool ascending);

}  // namespace crackfreq::cli
