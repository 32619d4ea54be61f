#include "cli/run.hpp"

#include <omp.h>

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>

#include "crackfreq/blowup.hpp"
#include "crackfreq/errors.hpp"
#include "crackfreq/exact.hpp"
#include "crackfreq/fem.hpp"
#include "crackfreq/frequency.hpp"
#include "crackfreq/slitmesh.hpp"
#include "crackfreq/source.hpp"
#include "crackfreq/spectrum.hpp"

namespace crackfreq::cli {

using nlohmann::ordered_json;

namespace {

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::solve: return "solve";
    case Mode::frequency: return "frequency";
    case Mode::spectrum: return "spectrum";
    case Mode::blowup: return "blowup";
    case Mode::validate: return "validate";
  }
  return "?";
}

struct Context {
  const RunConfig& cfg;
  Mode mode;
  StagedOutput& out;
  StageTimer timer;
  std::vector<Check> checks;
  ordered_json metrics = ordered_json::object();
  ordered_json solver = ordered_json::object();

  void stage(const std::string& name, const std::function<void()>& body) {
    timer.start(name);
    try {
      body();
    } catch (const Error& e) {
      throw StageFailure(name, e.code(), e.what());
    } catch (const std::exception& e) {
      throw StageFailure(name, "InternalError", e.what());
    }
    timer.stop();
  }

  void check(const std::string& name, double value, double tolerance, bool pass) {
    checks.push_back({name, value, tolerance, pass});
  }
};

std::string mesh_text(const SlitMesh& mesh) {
  std::ostringstream s;
  write_mesh(s, mesh);
  return s.str();
}

bool is_exact(Scenario s) { return s == Scenario::exact_harmonic || s == Scenario::exact_bessel; }

// Leading Fourier coefficient of amplitude * J_{k/2}(sqrt(c) r) cos(k t / 2)
// against the normalized circle mode.
double bessel_alpha(const RunConfig& cfg) {
  const double nu = 0.5 * cfg.k;
  const double lead = std::pow(0.5 * std::sqrt(cfg.potential.c), nu) / std::tgamma(nu + 1.0);
  const double norm = cfg.k == 0 ? std::sqrt(2.0 * std::numbers::pi) : std::sqrt(std::numbers::pi);
  return cfg.amplitude * lead * norm;
}

void run_sphere(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  if (ctx.mode != Mode::spectrum && ctx.mode != Mode::validate)
    throw StageFailure("config", "ConfigError", "sphere_spectrum only supports the spectrum and validate commands");
  std::shared_ptr<const SlitMesh> mesh;
  ctx.stage("mesh", [&] {
    mesh = std::make_shared<const SlitMesh>(make_slit_sphere(cfg.mesh.base_resolution));
    ctx.out.write("sphere_mesh.txt", mesh_text(*mesh));
  });
  ctx.stage("spectrum", [&] {
    EigenOptions opts;
    opts.seed = cfg.seed;
    const SpectralBasis basis = eigensolve_slit_sphere(mesh, cfg.eigen_count, opts);
    ctx.out.write("spectrum.csv", spectrum_to_csv(basis));
    ctx.out.write("clusters.csv", clusters_to_csv(basis));
    const SurfaceSystem sys = assemble_surface(*mesh);
    double max_rq = 0.0;
    double max_res = 0.0;
    double min_trace = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < basis.entries.size(); ++i) {
      const auto& e = basis.entries[i];
      const double rq = e.nodal.dot(sys.stiffness * e.nodal) / e.nodal.dot(sys.mass * e.nodal);
      max_rq = std::max(max_rq, std::abs(rq - e.mu));
      max_res = std::max(max_res, e.residual);
      min_trace = std::min(min_trace, trace_nonvanishing_check(basis, e));
      std::ostringstream vec;
      vec << "vertex_id,value\n";
      for (Eigen::Index v = 0; v < e.nodal.size(); ++v) vec << v << ',' << format_double(e.nodal[v]) << '\n';
      char name[64];
      std::snprintf(name, sizeof name, "eigenvectors/eigvec_%02zu.csv", i);
      ctx.out.write(name, vec.str());
    }
    ordered_json multiplicities = ordered_json::object();
    for (const auto& c : basis.clusters) {
      multiplicities[std::to_string(c.k)] = c.size;
      ctx.metrics["cluster_mean_k" + std::to_string(c.k)] = c.mean;
      if (c.k <= 4)
        ctx.check("cluster_k" + std::to_string(c.k), c.relative_error(), cfg.tolerances.spectrum,
                  c.relative_error() <= cfg.tolerances.spectrum);
    }
    ctx.metrics["multiplicities"] = multiplicities;
    const int zero_mult = basis.multiplicity(0);
    ctx.check("mu0_simple", zero_mult, 1, zero_mult == 1);
    ctx.check("rayleigh_consistency", max_rq, 1e-10, max_rq <= 1e-10);
    ctx.check("eigen_residual", max_res, 1e-10, max_res <= 1e-10);
    ctx.check("trace_nonvanishing", min_trace, 0.0, min_trace > 0.0);
    ctx.solver = {{"method", "shift-invert subspace iteration"}, {"max_residual", max_res}};
  });
}

void run_disk(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const Scenario sc = cfg.scenario;
  if (ctx.mode == Mode::spectrum)
    throw StageFailure("config", "ConfigError", "the spectrum command needs scenario sphere_spectrum");
  const bool want_frequency = ctx.mode != Mode::solve;
  const bool want_blowup = ctx.mode == Mode::blowup || ctx.mode == Mode::validate;
  const double R = cfg.mesh.radius;
  const CrackGeometry geom = build_geometry(CrackProfile::flat(2), R);
  const double c = cfg.potential.c;
  const Potential f = sc == Scenario::exact_harmonic                ? Potential::zero()
                      : sc == Scenario::fem_radial_potential         ? Potential::radial_power(c, cfg.potential.epsilon)
                                                                     : Potential::constant(c);
  AssemblyOptions asm_opts;
  asm_opts.tip_aware_quadrature = sc == Scenario::fem_radial_potential;

  std::shared_ptr<const SlitMesh> mesh;
  std::shared_ptr<const SlitMesh> unit_mesh;
  ctx.stage("mesh", [&] {
    mesh = std::make_shared<const SlitMesh>(
        make_slit_disk(R, cfg.mesh.levels, cfg.mesh.grading_ratio, cfg.mesh.base_resolution));
    unit_mesh = R == 1.0 ? mesh
                         : std::make_shared<const SlitMesh>(make_slit_disk(1.0, cfg.mesh.levels, cfg.mesh.grading_ratio,
                                                                           cfg.mesh.base_resolution));
    ctx.out.write("mesh.txt", mesh_text(*mesh));
    ctx.metrics["vertices"] = mesh->vertices.size();
    ctx.metrics["triangles"] = mesh->triangles.size();
  });

  // Closed forms for the exact scenarios and the boundary data of the FEM ones.
  std::shared_ptr<const SolutionSource> reference;
  if (sc == Scenario::exact_harmonic || sc == Scenario::fem_radial_potential)
    reference = std::make_shared<HarmonicSource>(CrackHarmonic{cfg.k, cfg.amplitude});
  else
    reference = std::make_shared<BesselSource>(BesselMode{cfg.k, c, cfg.amplitude});
  const PointFunction ref_fn = [&](const Eigen::Vector2d& p, Side s) { return reference->value(p, s); };

  std::optional<Field> field;
  ctx.stage("solve", [&] {
    if (is_exact(sc)) {
      field = interpolate(mesh, ref_fn);
    } else {
      const Assembled sys = assemble(*mesh, geom, f, asm_opts);
      Solution sol = solve_dirichlet(mesh, sys, boundary_data(*mesh, ref_fn));
      ctx.solver = {{"method", sol.stats.method},
                    {"iterations", sol.stats.iterations},
                    {"residual", sol.stats.residual},
                    {"rhs_norm", sol.stats.rhs_norm},
                    {"free_dofs", sol.stats.free_dofs}};
      field = std::move(sol.field);
      if (sc == Scenario::fem_constant_potential) {
        const double rel = l2_error(*field, ref_fn) / l2_norm(interpolate(mesh, ref_fn));
        ctx.metrics["l2_relative"] = rel;
        ctx.check("fem_l2_relative", rel, cfg.tolerances.l2_relative, rel <= cfg.tolerances.l2_relative);
      }
    }
    ctx.out.write("field.csv", field_to_csv(*field));
  });
  if (!want_frequency) return;

  FrequencyTrace trace;
  GammaEstimate gamma;
  ctx.stage("frequency", [&] {
    const std::vector<double> radii = expand(cfg.radii, true);
    if (sc == Scenario::exact_harmonic) {
      trace = closed_form_trace(CrackHarmonic{cfg.k, cfg.amplitude}, radii, R, cfg.potential.epsilon);
    } else if (sc == Scenario::exact_bessel) {
      trace = closed_form_trace(BesselMode{cfg.k, c, cfg.amplitude}, radii, R, cfg.potential.epsilon);
    } else {
      TraceOptions opts;
      opts.epsilon = cfg.potential.epsilon;
      opts.assembly = asm_opts;
      trace = compute_trace(*field, geom, f, radii, opts);
    }
    gamma = estimate_gamma(trace);
    trace.gamma_estimate = gamma.gamma;
    const MonotonicityAudit mono = audit_monotonicity(trace, cfg.tolerances.monotonicity_slack,
                                                      cfg.tolerances.monotonicity_slack);
    trace.monotonicity_constant = mono.fitted_C;
    ctx.metrics["gamma"] = gamma.gamma;
    ctx.metrics["k0"] = gamma.k0;
    ctx.metrics["delta"] = trace.delta;
    ctx.metrics["fitted_C"] = mono.fitted_C;
    ctx.metrics["monotonicity_violations"] = mono.violations.size();
    const double target = 0.5 * cfg.k;
    const double gtol = sc == Scenario::exact_harmonic ? cfg.tolerances.exact_gamma : cfg.tolerances.gamma;
    ctx.check("gamma", std::abs(gamma.gamma - target), gtol, std::abs(gamma.gamma - target) <= gtol);
    if (sc == Scenario::exact_harmonic)
      ctx.check("monotonicity_C_zero", mono.fitted_C, 0.0, mono.fitted_C == 0.0);
    else
      ctx.check("monotonicity_violations", static_cast<double>(mono.violations.size()), 0.0,
                mono.violations.empty() && std::isfinite(mono.fitted_C));

    try {
      const HGrowth growth = audit_H_growth(trace, gamma.gamma);
      ctx.metrics["upper_alpha"] = growth.upper_alpha;
      ctx.metrics["H_limit"] = growth.limit_estimate;
      ctx.check("H_limit_positive", growth.limit_estimate, 0.0, true);
    } catch (const NonPositiveLimit&) {
      ctx.check("H_limit_positive", std::numeric_limits<double>::quiet_NaN(), 0.0, false);
    }

    if (sc == Scenario::exact_harmonic) {
      double worst = 0.0;
      const CrackHarmonic u{cfg.k, cfg.amplitude};
      for (double r : radii) {
        if (2.0 * r > R) continue;
        const double ratio = closed_form_HEN(u, 2.0 * r).H / closed_form_HEN(u, r).H;
        worst = std::max(worst, std::abs(ratio - std::pow(2.0, cfg.k)));
      }
      ctx.metrics["doubling_deviation"] = worst;
      ctx.check("doubling_exact", worst, cfg.tolerances.doubling, worst <= cfg.tolerances.doubling);
    } else {
      const DoublingAudit d = audit_doubling(trace);
      ctx.metrics["doubling_C1"] = d.C1;
      ctx.check("doubling_bounded", d.C1, 0.0, std::isfinite(d.C1));
    }
    ctx.out.write("trace.csv", trace_to_csv(trace, gamma.gamma));
  });
  if (!want_blowup) return;

  ctx.stage("blowup", [&] {
    const SpectralBasis basis = basis_circle(cfg.fourier_kmax);
    std::shared_ptr<const SolutionSource> source = reference;
    if (!is_exact(sc)) source = std::make_shared<FieldSource>(*field);
    if (gamma.k0 > cfg.fourier_kmax) throw InvalidArgument("blowup: k0 exceeds fourier_kmax");
    AlphaOptions aopts;
    aopts.spread_tolerance = 0.0;
    const AlphaResult alpha = alpha_coefficients(*source, geom, f, basis, gamma.k0, cfg.alpha_radii, aopts);
    const std::vector<double> lambdas = expand(cfg.lambdas, false);
    const BlowupReport rep = verify_blowup(*source, basis, alpha, lambdas);
    ctx.out.write("blowup.csv", blowup_to_csv(rep));
    ctx.out.write("blowup_summary.json", blowup_summary_json(rep, gamma.gamma));

    const double a = alpha.alpha.front();
    const double spread = alpha.spread.front() / std::max(std::abs(a), 1e-300);
    ctx.metrics["alpha"] = alpha.alpha;
    ctx.metrics["alpha_relative_spread"] = spread;
    ctx.metrics["blowup_value_slope"] = rep.value_slope;
    ctx.metrics["blowup_gradient_slope"] = rep.gradient_slope;
    ctx.metrics["blowup_final_error"] = rep.value_errors.back();
    const double stol = sc == Scenario::exact_harmonic ? 1e-8 : cfg.tolerances.alpha_spread;
    ctx.check("alpha_spread", spread, stol, spread <= stol);
    if (sc == Scenario::exact_harmonic) {
      const double expect = cfg.amplitude * (cfg.k == 0 ? std::sqrt(2.0 * std::numbers::pi) : std::sqrt(std::numbers::pi));
      const double err = std::abs(a - expect) / std::abs(expect);
      ctx.check("alpha_value", err, 1e-8, err <= 1e-8);
    }
    if (sc == Scenario::exact_bessel && gamma.k0 == cfg.k) {
      const double expect = bessel_alpha(cfg);
      const double err = std::abs(a - expect) / std::abs(expect);
      ctx.check("alpha_value", err, cfg.tolerances.alpha_value, err <= cfg.tolerances.alpha_value);
      ctx.check("blowup_slope", rep.value_slope, 1.8, rep.value_slope >= 1.8);
    }
    if (is_exact(sc)) {
      ctx.check("blowup_decreasing", 0.0, 0.0, rep.value_decreasing && rep.gradient_decreasing);
    } else {
      ctx.metrics["blowup_value_decreasing"] = rep.value_decreasing;
      ctx.metrics["blowup_gradient_decreasing"] = rep.gradient_decreasing;
    }

    std::ostringstream phi;
    phi << "lambda,phi,H,parseval_relative\n";
    double worst_parseval = 0.0;
    double worst_norm = 0.0;
    for (double lam : lambdas) {
      const double H = height(*source, geom, lam, 512);
      double partial = 0.0;
      for (int k = 0; k <= cfg.fourier_kmax; ++k)
        for (double v : fourier_phi(*source, lam, basis, k)) partial += v * v;
      const double rel = std::abs(partial - H) / H;
      worst_parseval = std::max(worst_parseval, rel);
      phi << format_double(lam) << ',' << format_double(fourier_phi(*source, lam, basis, gamma.k0).front()) << ','
          << format_double(H) << ',' << format_double(rel) << '\n';
      if (source->mesh() == nullptr || source->mesh()->layers_inside(lam) >= 8) {
        const RescaledField W = rescale(*source, geom, lam, unit_mesh);
        worst_norm = std::max(worst_norm, std::abs(W.normalization - 1.0));
      }
    }
    ctx.out.write("phi.csv", phi.str());
    ctx.metrics["parseval_relative"] = worst_parseval;
    ctx.metrics["normalization_deviation"] = worst_norm;
    if (is_exact(sc))
      ctx.check("parseval", worst_parseval, cfg.tolerances.parseval, worst_parseval <= cfg.tolerances.parseval);
    ctx.check("rescale_normalization", worst_norm, cfg.tolerances.normalization,
              worst_norm <= cfg.tolerances.normalization);
  });
}

}  // namespace

bool RunResult::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

RunResult run(const RunConfig& cfg, Mode mode) {
  validate(cfg);
  StagedOutput out(cfg.output);
  Context ctx{cfg, mode, out, {}, {}, ordered_json::object(), ordered_json::object()};
  const ordered_json config_json = config_to_json(cfg);
  const std::string config_text = config_json.dump(2) + "\n";
  out.write("config.json", config_text);

  if (cfg.scenario == Scenario::sphere_spectrum) run_sphere(ctx);
  else run_disk(ctx);

  RunResult res;
  res.checks = ctx.checks;
  ordered_json& m = res.manifest;
  m["tool"] = "crackfreq";
  m["version"] = CRACKFREQ_VERSION;
  m["scenario"] = to_string(cfg.scenario);
  m["mode"] = mode_name(mode);
  m["config_sha256"] = sha256_hex(config_text);
  m["threads"] = omp_get_max_threads();
  m["stages"] = ctx.timer.to_json();
  m["solver"] = ctx.solver;
  m["metrics"] = ctx.metrics;
  auto checks = ordered_json::array();
  for (const auto& c : ctx.checks)
    checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
  m["checks"] = checks;
  m["all_pass"] = res.all_pass();
  auto files = ordered_json::array();
  for (const auto& f : out.files()) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  m["files"] = files;
  out.write("manifest.json", m.dump(2) + "\n");
  out.commit();
  return res;
}

std::string error_record(const std::string& code, const std::string& message, const std::string& stage) {
  ordered_json j;
  j["error"] = code;
  j["stage"] = stage;
  j["message"] = message;
  return j.dump();
}

}  // namespace crackfreq::cli
