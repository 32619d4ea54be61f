#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "crackfreq/errors.hpp"
#include "crackfreq/exact.hpp"
#include "crackfreq/fem.hpp"
#include "crackfreq/frequency.hpp"
#include "crackfreq/slitmesh.hpp"
#include "crackfreq/source.hpp"

using namespace crackfreq;
using Eigen::Vector2d;
constexpr double pi = std::numbers::pi;

namespace {

const CrackGeometry flat = build_geometry(CrackProfile::flat(2), 1.0);

std::shared_ptr<const SlitMesh> reference_mesh() {
  static const auto m = std::make_shared<const SlitMesh>(make_slit_disk(1.0, 8, 0.5, 64));
  return m;
}

std::vector<double> geometric(double first, double ratio, int count) {
  std::vector<double> r;
  for (int i = 0; i < count; ++i) r.push_back(first * std::pow(ratio, i));
  std::reverse(r.begin(), r.end());
  return r;
}

Field bessel_fem() {
  const auto m = reference_mesh();
  const BesselMode b{1, 1.0, 1.0};
  const auto data = boundary_data(*m, [&](const Vector2d& p, Side s) { return value(b, p, s); });
  return solve_dirichlet(m, assemble(*m, flat, Potential::constant(1.0)), data).field;
}

}  // namespace

TEST_CASE("interpolated harmonic has N close to 1/2") {
  const auto m = reference_mesh();
  const CrackHarmonic u{1, 1.0};
  const Field f = interpolate(m, [&](const Vector2d& p, Side s) { return value(u, p, s); });
  const FrequencyTrace t = compute_trace(f, flat, Potential::zero(), geometric(0.8, 0.8, 10));
  for (std::size_t i = 0; i < t.radii.size(); ++i) {
    CHECK(t.radii[i] >= 0.1);
    CHECK(t.N[i] == doctest::Approx(0.5).epsilon(0.04));
    CHECK(t.H[i] == doctest::Approx(pi * t.radii[i]).epsilon(0.03));
  }
}

TEST_CASE("constant field: H = 2 pi a^2, E = 0") {
  const auto m = reference_mesh();
  const Field f(m, Eigen::VectorXd::Constant(m->vertices.size(), 1.5));
  const FrequencyTrace t = compute_trace(f, flat, Potential::zero(), {0.2, 0.4, 0.6});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(t.H[i] == doctest::Approx(2.0 * pi * 2.25).epsilon(1e-12));
    CHECK(std::abs(t.E[i]) <= 1e-12);
    CHECK(std::abs(t.N[i]) <= 1e-12);
  }
}

TEST_CASE("FEM Bessel trace matches the closed form and extrapolates to 1/2") {
  const Field u = bessel_fem();
  const auto radii = geometric(0.8, 0.8, 18);
  TraceOptions opts;
  opts.epsilon = 1.0;
  const FrequencyTrace t = compute_trace(u, flat, Potential::constant(1.0), radii, opts);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const HEN h = closed_form_HEN(BesselMode{1, 1.0, 1.0}, radii[i]);
    CHECK(t.N[i] == doctest::Approx(h.N).epsilon(0.02));
    CHECK(t.N[i] >= -2.0 * eta_gauge(Potential::constant(1.0), radii[i], 1.0));
  }
  const GammaEstimate g = estimate_gamma(t);
  CHECK(std::abs(g.gamma - 0.5) <= 0.05);
  CHECK(g.k0 == 1);
  // The pair that fixes C sits exactly at -slack, so violations are counted at the same slack.
  const MonotonicityAudit a = audit_monotonicity(t, 1e-3, 1e-3);
  CHECK(std::isfinite(a.fitted_C));
  CHECK(a.violations.empty());
  if (a.fitted_C > 0.0) CHECK_FALSE(audit_monotonicity(t).violations.empty());
  CHECK(audit_H_growth(t, g.gamma).limit_estimate > 0.0);
  CHECK(std::isfinite(audit_doubling(t).C1));
}

TEST_CASE("compute_trace is bit-identical serial and parallel") {
  const Field u = bessel_fem();
  TraceOptions s, p;
  s.exec = Execution::serial;
  s.assembly.exec = Execution::serial;
  const auto radii = geometric(0.7, 0.7, 10);
  const FrequencyTrace a = compute_trace(u, flat, Potential::constant(1.0), radii, s);
  const FrequencyTrace b = compute_trace(u, flat, Potential::constant(1.0), radii, p);
  CHECK(a.H == b.H);
  CHECK(a.E == b.E);
}

TEST_CASE("N is invariant under field scaling") {
  const Field u = bessel_fem();
  const auto radii = geometric(0.6, 0.6, 5);
  const FrequencyTrace base = compute_trace(u, flat, Potential::constant(1.0), radii);
  for (double a : {10.0, 0.01}) {
    const Field scaled(u.mesh_ptr(), a * u.values());
    const FrequencyTrace t = compute_trace(scaled, flat, Potential::constant(1.0), radii);
    for (std::size_t i = 0; i < radii.size(); ++i) CHECK(std::abs(t.N[i] - base.N[i]) <= 1e-12);
  }
}

TEST_CASE("radii must be resolved by the mesh") {
  const Field u = bessel_fem();
  CHECK_THROWS_AS(compute_trace(u, flat, Potential::constant(1.0), {1e-4, 0.5}), RadiusTooSmall);
  CHECK_THROWS_AS(compute_trace(u, flat, Potential::constant(1.0), {0.5, 1.5}), InvalidArgument);
}

TEST_CASE("energy equals the boundary flux form for exact solutions") {
  for (int k = 1; k <= 3; ++k) {
    const HarmonicSource src(CrackHarmonic{k, 1.0});
    for (double r : {0.2, 0.7}) {
      const double flux = boundary_flux_energy(src, r);
      CHECK(flux == doctest::Approx(closed_form_HEN(CrackHarmonic{k, 1.0}, r).E).epsilon(1e-3));
      CHECK(height(src, flat, r) == doctest::Approx(closed_form_HEN(CrackHarmonic{k, 1.0}, r).H).epsilon(1e-10));
    }
  }
}

TEST_CASE("eta gauge") {
  CHECK(eta_gauge(Potential::zero(), 0.5, 1.0) == 0.0);
  for (double r : {0.1, 0.5, 0.9})
    CHECK(eta_gauge(Potential::constant(3.0), r, 1.0) == doctest::Approx(3.0 * std::sqrt(pi) * r * r).epsilon(1e-10));
  double prev = 0.0;
  for (double r = 0.05; r < 1.0; r += 0.1) {
    const double g = eta_gauge(Potential::radial_power(1.0, 0.5), r, 0.5);
    CHECK(g > prev);
    prev = g;
  }
}

TEST_CASE("exact harmonic traces: gamma, monotonicity, growth, doubling") {
  std::vector<double> radii;
  for (int j = 0; j < 14; ++j) radii.push_back(std::ldexp(0.8, -j));
  std::reverse(radii.begin(), radii.end());
  for (int k = 1; k <= 3; ++k) {
    const FrequencyTrace t = closed_form_trace(CrackHarmonic{k, 1.0}, radii);
    const GammaEstimate g = estimate_gamma(t);
    CHECK(std::abs(g.gamma - 0.5 * k) <= 1e-6);
    CHECK(g.k0 == k);
    CHECK(audit_monotonicity(t).fitted_C == 0.0);
    for (double ratio : audit_doubling(t).ratios_at_2) CHECK(std::abs(ratio - std::pow(2.0, k)) <= 1e-8);
  }
  const FrequencyTrace t1 = closed_form_trace(CrackHarmonic{1, 1.0}, radii);
  for (std::size_t i = 0; i < radii.size(); ++i) CHECK(std::abs(t1.H[i] / radii[i] - pi) <= 1e-6);
  const HGrowth h1 = audit_H_growth(t1, 0.5);
  CHECK(std::abs(h1.limit_estimate - pi) <= 1e-6);
  const HGrowth h3 = audit_H_growth(closed_form_trace(CrackHarmonic{1, 3.0}, radii), 0.5);
  CHECK(h3.limit_estimate == doctest::Approx(9.0 * h1.limit_estimate).epsilon(1e-12));
  const FrequencyTrace c = closed_form_trace(CrackHarmonic{0, 2.0}, radii);
  CHECK(estimate_gamma(c).gamma == doctest::Approx(0.0));
  CHECK(estimate_gamma(c).k0 == 0);
}

TEST_CASE("Bessel mode frequency decreases in r; fitted C matches the closed form") {
  // N(r) = r cot r - 1/2 for J_{1/2}, so the frequency falls as r grows.
  std::vector<double> radii;
  for (int i = 0; i < 50; ++i) radii.push_back(0.02 + 0.78 * i / 49.0);
  const FrequencyTrace t = closed_form_trace(BesselMode{1, 1.0, 1.0}, radii);
  double C = 0.0;
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    const double a = radii[i] / std::tan(radii[i]) - 0.5;
    const double b = radii[i + 1] / std::tan(radii[i + 1]) - 0.5;
    C = std::max(C, (a - b - 1e-3) / (std::pow(radii[i + 1], t.delta) - std::pow(radii[i], t.delta)));
  }
  const MonotonicityAudit a = audit_monotonicity(t);
  CHECK(a.fitted_C > 0.0);
  CHECK(a.fitted_C == doctest::Approx(C).epsilon(1e-6));
  CHECK(audit_monotonicity(t, 1e-3, 1e-3).violations.empty());
}

TEST_CASE("planted monotonicity constant is recovered") {
  for (double C0 : {0.3, 2.0}) {
    std::vector<double> r, N;
    for (int i = 0; i < 30; ++i) {
      r.push_back(0.01 * std::pow(1.15, i));
      N.push_back(0.5 - C0 * r.back());
    }
    const FrequencyTrace t = synthetic_trace(r, N, 1.0);
    CHECK(audit_monotonicity(t, 0.0).fitted_C == doctest::Approx(C0).epsilon(0.1));
    CHECK(audit_monotonicity(t).fitted_C <= C0);
  }
}

TEST_CASE("gamma and growth failure modes") {
  std::vector<double> r;
  for (int i = 0; i < 12; ++i) r.push_back(0.03 * std::pow(1.3, i));
  CHECK_THROWS_AS(estimate_gamma(synthetic_trace(r, std::vector<double>(12, 0.75), 1.0)), HalfIntegerMismatch);
  std::vector<double> far(r);
  for (double& x : far) x += 0.1;
  CHECK_THROWS_AS(estimate_gamma(synthetic_trace(far, std::vector<double>(12, 0.5), 1.0)), InvalidArgument);

  FrequencyTrace t = synthetic_trace(r, std::vector<double>(12, 0.5), 1.0);
  for (std::size_t i = 0; i < r.size(); ++i) t.H[i] = r[i] * (-0.1 + 5.0 * r[i]);
  CHECK_THROWS_AS(audit_H_growth(t, 0.5), NonPositiveLimit);
}

TEST_CASE("the zero field has no frequency") {
  const auto m = reference_mesh();
  const Field z(m, Eigen::VectorXd::Zero(m->vertices.size()));
  const FrequencyTrace t = compute_trace(z, flat, Potential::zero(), geometric(0.8, 0.7, 12));
  for (double n : t.N) CHECK(std::isnan(n));
  CHECK_THROWS_AS(estimate_gamma(t), HeightNotPositive);
  CHECK_THROWS_AS(audit_monotonicity(t), HeightNotPositive);
}

TEST_CASE("trace table export") {
  const FrequencyTrace t = closed_form_trace(CrackHarmonic{1, 1.0}, {0.1, 0.2});
  const std::string csv = trace_to_csv(t, 0.5);
  CHECK(csv.rfind("r,H,E,N,H_over_r2gamma\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
