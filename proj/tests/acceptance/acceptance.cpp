// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <string>

#include "crackfreq/blowup.hpp"
#include "crackfreq/errors.hpp"
#include "crackfreq/frequency.hpp"
#include "crackfreq/spectrum.hpp"

using namespace crackfreq;
using Eigen::Vector2d;
constexpr double pi = std::numbers::pi;

namespace {

const CrackGeometry flat = build_geometry(CrackProfile::flat(2), 1.0);

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void guarded(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> radii_ascending() {
  std::vector<double> r;
  for (int j = 17; j >= 0; --j) r.push_back(0.8 * std::pow(0.8, j));
  return r;
}

std::vector<double> dyadic_radii() {
  std::vector<double> r;
  for (int j = 13; j >= 0; --j) r.push_back(std::ldexp(0.8, -j));
  return r;
}

std::shared_ptr<const SlitMesh> reference_mesh() {
  static const auto m = std::make_shared<const SlitMesh>(make_slit_disk(1.0, 8, 0.5, 64));
  return m;
}

Field fem(std::shared_ptr<const SlitMesh> m, const Potential& f, const PointFunction& data) {
  AssemblyOptions opts;
  opts.tip_aware_quadrature = f.kind() == Potential::Kind::radial_power;
  return solve_dirichlet(m, assemble(*m, flat, f, opts), boundary_data(*m, data)).field;
}

PointFunction harmonic_fn(int k) {
  return [k](const Vector2d& p, Side s) { return value(CrackHarmonic{k, 1.0}, p, s); };
}
PointFunction bessel_fn() {
  return [](const Vector2d& p, Side s) { return value(BesselMode{1, 1.0, 1.0}, p, s); };
}

double rel_l2(const Field& u, const PointFunction& ref) {
  return l2_error(u, ref) / l2_norm(interpolate(u.mesh_ptr(), ref));
}

struct FemCase {
  std::string name;
  Potential f;
  PointFunction data;
  double epsilon;
};

std::vector<FemCase> fem_cases(double eps_radial) {
  return {{"harmonic f=0", Potential::zero(), harmonic_fn(1), 1.0},
          {"bessel f=1", Potential::constant(1.0), bessel_fn(), 1.0},
          {"radial eps=" + fmt("%.2g", eps_radial), Potential::radial_power(1.0, eps_radial), harmonic_fn(1),
           eps_radial}};
}

FrequencyTrace fem_trace(const FemCase& c) {
  TraceOptions opts;
  opts.epsilon = c.epsilon;
  opts.assembly.tip_aware_quadrature = c.f.kind() == Potential::Kind::radial_power;
  return compute_trace(fem(reference_mesh(), c.f, c.data), flat, c.f, radii_ascending(), opts);
}

}  // namespace

int main() {
  guarded(1, [] {
    const int threads = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto t0 = std::chrono::steady_clock::now();
    const SpectralBasis b = eigensolve_slit_sphere(std::make_shared<const SlitMesh>(make_slit_sphere(64)), 12);
    const double elapsed = seconds_since(t0);
    omp_set_num_threads(threads);
    double worst = 0.0;
    int seen = 0;
    for (const auto& c : b.clusters)
      if (c.k <= 4) {
        worst = std::max(worst, c.relative_error());
        ++seen;
      }
    report(1, seen == 5 && worst <= 0.03 && elapsed <= 120.0,
           fmt("sphere res 64: k=0..4 max cluster error %.3g%% (<= 3%%), %.2f s (<= 120 s)", 100 * worst, elapsed));
  });

  guarded(2, [] {
    double worst = 0.0;
    for (int k = 1; k <= 3; ++k)
      worst = std::max(worst, std::abs(estimate_gamma(closed_form_trace(CrackHarmonic{k, 1.0}, radii_ascending())).gamma -
                                       0.5 * k));
    const auto t0 = std::chrono::steady_clock::now();
    const FrequencyTrace t = fem_trace(fem_cases(0.5)[1]);
    const double g = estimate_gamma(t).gamma;
    const double elapsed = seconds_since(t0);
    report(2, worst <= 1e-6 && std::abs(g - 0.5) <= 0.05 && elapsed <= 60.0,
           fmt("exact k=1..3 max |gamma-k/2| %.2e (<= 1e-6); FEM Bessel gamma %.4f (0.5 +- 0.05), %.2f s", worst, g,
               elapsed));
  });

  guarded(3, [] {
    const auto m = reference_mesh();
    const double eh = rel_l2(fem(m, Potential::zero(), harmonic_fn(1)), harmonic_fn(1));
    const double eb = rel_l2(fem(m, Potential::constant(1.0), bessel_fn()), bessel_fn());
    std::vector<double> lh, le;
    for (auto [L, base] : {std::pair{3, 16}, {4, 32}, {5, 64}, {6, 128}}) {
      const auto mm = std::make_shared<const SlitMesh>(make_slit_disk(1.0, L, 0.5, base));
      lh.push_back(std::log(inspect_mesh(*mm).max_diameter));
      le.push_back(std::log(rel_l2(fem(mm, Potential::zero(), harmonic_fn(1)), harmonic_fn(1))));
    }
    double mx = 0, my = 0, sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lh.size(); ++i) mx += lh[i] / lh.size(), my += le[i] / le.size();
    for (std::size_t i = 0; i < lh.size(); ++i) sxy += (lh[i] - mx) * (le[i] - my), sxx += (lh[i] - mx) * (lh[i] - mx);
    const double rate = sxy / sxx;
    report(3, eh <= 0.01 && eb <= 0.015 && rate >= 0.9,
           fmt("rel L2: harmonic %.3g%% (<= 1%%), Bessel %.3g%% (<= 1.5%%); rate in h %.3f (>= 0.9)", 100 * eh,
               100 * eb, rate));
  });

  guarded(4, [] {
    double exactC = 0.0;
    for (int k = 0; k <= 3; ++k)
      exactC = std::max(exactC, audit_monotonicity(closed_form_trace(CrackHarmonic{k, 1.0}, radii_ascending())).fitted_C);
    bool ok = exactC == 0.0;
    std::string detail = fmt("exact fitted_C %.3g (= 0);", exactC);
    for (const FemCase& c : fem_cases(1.0)) {
      const MonotonicityAudit a = audit_monotonicity(fem_trace(c), 1e-3, 1e-3);
      ok = ok && std::isfinite(a.fitted_C) && a.violations.empty();
      detail += " " + c.name + fmt(": C %.3g, %g violations;", a.fitted_C, a.violations.size());
    }
    report(4, ok, detail);
  });

  guarded(5, [] {
    const FrequencyTrace t = closed_form_trace(CrackHarmonic{1, 1.0}, radii_ascending());
    double worst = 0.0;
    for (std::size_t i = 0; i < t.radii.size(); ++i) worst = std::max(worst, std::abs(t.H[i] / t.radii[i] - pi));
    const double lim = audit_H_growth(t, 0.5).limit_estimate;
    double min_limit = std::abs(lim - pi) <= 1e-6 ? lim : -1.0;
    for (int k = 2; k <= 3; ++k)
      min_limit = std::min(min_limit, audit_H_growth(closed_form_trace(CrackHarmonic{k, 1.0}, radii_ascending()), 0.5 * k)
                                          .limit_estimate);
    const FrequencyTrace b = closed_form_trace(BesselMode{1, 1.0, 1.0}, radii_ascending());
    min_limit = std::min(min_limit, audit_H_growth(b, estimate_gamma(b).gamma).limit_estimate);
    for (const FemCase& c : fem_cases(0.5)) {
      const FrequencyTrace ft = fem_trace(c);
      min_limit = std::min(min_limit, audit_H_growth(ft, estimate_gamma(ft).gamma).limit_estimate);
    }
    report(5, worst <= 1e-6 && min_limit > 0.0,
           fmt("max |H/r - pi| %.2e (<= 1e-6); k=1 limit %.10f; smallest limit over scenarios %.4g (> 0)", worst, lim,
               min_limit));
  });

  guarded(6, [] {
    double worst = 0.0;
    int ratios = 0;
    for (int k = 1; k <= 3; ++k)
      for (double q : audit_doubling(closed_form_trace(CrackHarmonic{k, 1.0}, dyadic_radii())).ratios_at_2) {
        worst = std::max(worst, std::abs(q - std::pow(2.0, k)));
        ++ratios;
      }
    double C1 = 0.0;
    for (const FemCase& c : fem_cases(0.5)) C1 = std::max(C1, audit_doubling(fem_trace(c)).C1);
    report(6, ratios > 0 && worst <= 1e-8 && std::isfinite(C1),
           fmt("exact H(2r)/H(r) max deviation from 2^(2 gamma) %.2e over %g pairs (<= 1e-8); FEM C1 %.4g (finite)",
               worst, ratios, C1));
  });

  guarded(7, [] {
    const SpectralBasis basis = basis_circle(8);
    const double amp = 1.0;
    const BesselSource src(BesselMode{1, 1.0, amp});
    const AlphaResult a = alpha_coefficients(src, flat, Potential::constant(1.0), basis, 1, {0.1, 0.2, 0.4});
    const BlowupReport r = verify_blowup(src, basis, a, lambda_schedule(0.4, 0.5, 6));
    const double aerr = std::abs(a.alpha[0] - amp * std::sqrt(2.0)) / (amp * std::sqrt(2.0));
    double spread = 0.0;
    for (int k = 0; k <= 3; ++k) {
      const AlphaResult h = alpha_coefficients(HarmonicSource(CrackHarmonic{k, 1.0}), flat, Potential::zero(), basis, k,
                                               {0.1, 0.2, 0.4});
      spread = std::max(spread, h.spread[0] / std::abs(h.alpha[0]));
    }
    report(7, r.value_decreasing && r.value_slope >= 1.8 && aerr <= 0.02 && spread <= 1e-8,
           fmt("Bessel: errors decreasing %g, slope %.3f (>= 1.8), alpha1 rel error %.2e (<= 2%%); exact spread %.2e "
               "(<= 1e-8)",
               r.value_decreasing ? 1.0 : 0.0, r.value_slope, aerr, spread));
  });

  guarded(8, [] {
    const CrackGeometry g = build_geometry(CrackProfile::polynomial(3, {{1.0, {2}}}, 2.0), 0.3);
    const GeometryAudit a = audit_geometry(g, 10000, 20240917);
    report(8, a.samples == 10000 && a.ellipticity_violations == 0 && a.mu_violations == 0,
           fmt("g = y1^2, r1 = 0.3, %g samples: A z.z in [%.4f, %.4f]", a.samples, a.min_quadratic_form,
               a.max_quadratic_form) +
               fmt(", mu in [%.4f, %.4f], no violations", a.min_mu, a.max_mu));
  });

  guarded(9, [] {
    const SpectralBasis basis = basis_circle(8);
    std::vector<std::shared_ptr<const SolutionSource>> sources;
    for (int k = 0; k <= 3; ++k) sources.push_back(std::make_shared<HarmonicSource>(CrackHarmonic{k, 1.0}));
    sources.push_back(std::make_shared<BesselSource>(BesselMode{1, 1.0, 1.0}));
    sources.push_back(std::make_shared<BesselSource>(BesselMode{2, 4.0, 1.0}));
    double worst = 0.0;
    for (const auto& s : sources)
      for (double lam : lambda_schedule(0.4, 0.5, 6)) {
        double sum = 0.0;
        for (int k = 0; k <= 8; ++k)
          for (double v : fourier_phi(*s, lam, basis, k)) sum += v * v;
        const double H = height(*s, flat, lam, 512);
        worst = std::max(worst, std::abs(sum - H) / H);
      }
    report(9, worst <= 0.01, fmt("max |sum_{k<=8} phi^2 - H| / H = %.2e (<= 1%%)", worst));
  });

  guarded(10, [] {
    const auto m = reference_mesh();
    const Field zero(m, Eigen::VectorXd::Zero(m->vertices.size()));
    const FrequencyTrace t = compute_trace(zero, flat, Potential::zero(), radii_ascending());
    try {
      estimate_gamma(t);
      report(10, false, "estimate_gamma accepted the zero field");
    } catch (const HeightNotPositive& e) {
      report(10, true, std::string("zero field rejected: ") + e.what());
    }
  });

  std::printf("%s\n", failures == 0 ? "all criteria pass" : "some criteria FAIL");
  return failures == 0 ? 0 : 1;
}
