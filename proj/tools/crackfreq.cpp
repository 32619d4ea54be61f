// crackfreq: command-line front end for the slit-domain experiments.
//
//   crackfreq solve|frequency|spectrum|blowup|validate --config run.json [overrides]
//   crackfreq compare RUN_A RUN_B
//
// Thread count comes from CRACKFREQ_THREADS.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "cli/config.hpp"
#include "cli/run.hpp"
#include "crackfreq/errors.hpp"

using namespace crackfreq;
using namespace crackfreq::cli;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> scenario;
  std::optional<int> k;
  std::optional<double> amplitude;
  std::optional<double> c;
  std::optional<double> epsilon;
  std::optional<std::string> hypothesis;
  std::optional<double> radius;
  std::optional<int> base_resolution;
  std::optional<int> levels;
  std::optional<double> grading_ratio;
  std::optional<int> eigen_count;
  std::optional<int> fourier_kmax;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
};

void add_run_flags(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON run configuration");
  sub->add_option("--scenario", o.scenario, "exact_harmonic|exact_bessel|fem_constant_potential|fem_radial_potential|sphere_spectrum");
  sub->add_option("--k", o.k, "mode index");
  sub->add_option("--amplitude", o.amplitude);
  sub->add_option("--c", o.c, "potential coefficient");
  sub->add_option("--epsilon", o.epsilon, "potential exponent parameter, in (0,1)");
  sub->add_option("--hypothesis", o.hypothesis, "H1|H2");
  sub->add_option("--radius", o.radius, "disk radius R <= 1");
  sub->add_option("--base-resolution", o.base_resolution);
  sub->add_option("--levels", o.levels, "graded refinement levels");
  sub->add_option("--grading-ratio", o.grading_ratio);
  sub->add_option("--eigen-count", o.eigen_count);
  sub->add_option("--fourier-kmax", o.fourier_kmax);
  sub->add_option("--seed", o.seed);
  sub->add_option("--output", o.output, "output directory");
}

RunConfig build_config(const Overrides& o) {
  RunConfig cfg;
  if (!o.config.empty()) cfg = load_config(o.config);
  else if (!o.scenario) throw ConfigError("either --config or --scenario is required");
  if (o.scenario) cfg.scenario = scenario_from_string(*o.scenario);
  if (o.k) cfg.k = *o.k;
  if (o.amplitude) cfg.amplitude = *o.amplitude;
  if (o.c) cfg.potential.c = *o.c;
  if (o.epsilon) cfg.potential.epsilon = *o.epsilon;
  if (o.hypothesis) cfg.potential.hypothesis = *o.hypothesis;
  if (o.radius) cfg.mesh.radius = *o.radius;
  if (o.base_resolution) cfg.mesh.base_resolution = *o.base_resolution;
  if (o.levels) cfg.mesh.levels = *o.levels;
  if (o.grading_ratio) cfg.mesh.grading_ratio = *o.grading_ratio;
  if (o.eigen_count) cfg.eigen_count = *o.eigen_count;
  if (o.fourier_kmax) cfg.fourier_kmax = *o.fourier_kmax;
  if (o.seed) cfg.seed = *o.seed;
  if (o.output) cfg.output = *o.output;
  return cfg;
}

void set_threads() {
  if (const char* env = std::getenv("CRACKFREQ_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crackfreq: frequency function and blow-up experiments at a crack tip"};
  app.require_subcommand(1);
  Overrides o;
  std::string run_a, run_b;
  const std::pair<const char*, Mode> modes[] = {{"solve", Mode::solve},
                                                {"frequency", Mode::frequency},
                                                {"spectrum", Mode::spectrum},
                                                {"blowup", Mode::blowup},
                                                {"validate", Mode::validate}};
  std::vector<std::pair<CLI::App*, Mode>> subs;
  for (const auto& [name, mode] : modes) {
    CLI::App* sub = app.add_subcommand(name);
    add_run_flags(sub, o);
    subs.emplace_back(sub, mode);
  }
  CLI::App* cmp = app.add_subcommand("compare", "relative differences between two runs");
  cmp->add_option("run_a", run_a)->required();
  cmp->add_option("run_b", run_b)->required();
  CLI11_PARSE(app, argc, argv);
  set_threads();

  std::string stage = "config";
  try {
    if (cmp->parsed()) {
      stage = "compare";
      std::cout << compare(run_a, run_b).dump(2) << '\n';
      return 0;
    }
    for (const auto& [sub, mode] : subs) {
      if (!sub->parsed()) continue;
      const RunConfig cfg = build_config(o);
      stage = "run";
      const RunResult res = run(cfg, mode);
      for (const auto& c : res.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << format_double(c.value)
                  << " tol=" << format_double(c.tolerance) << '\n';
      std::cout << "output " << cfg.output << '\n';
      if (mode == Mode::validate && !res.all_pass()) return 1;
      return 0;
    }
  } catch (const StageFailure& e) {
    std::cerr << error_record(e.code(), e.what(), e.stage()) << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << error_record(e.code(), e.what(), stage) << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << error_record("InternalError", e.what(), stage) << '\n';
    return 2;
  }
  return 2;
}
