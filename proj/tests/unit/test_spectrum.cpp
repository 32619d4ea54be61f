#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "crackfreq/errors.hpp"
#include "crackfreq/quadrature.hpp"
#include "crackfreq/slitmesh.hpp"
#include "crackfreq/spectrum.hpp"

using namespace crackfreq;
constexpr double pi = std::numbers::pi;

namespace {

std::shared_ptr<const SlitMesh> sphere(int res) {
  return std::make_shared<const SlitMesh>(make_slit_sphere(res));
}

const SpectralBasis& sphere64() {
  static const SpectralBasis b = eigensolve_slit_sphere(sphere(64), 12);
  return b;
}

// int_0^{2pi} cos(a t / 2) cos(b t / 2) dt in closed form.
double gram_oracle(int a, int b) {
  if (a == b) return a == 0 ? 2 * pi : pi;
  auto s = [](int m) { return m == 0 ? 2 * pi : 2.0 * std::sin(m * pi) / m; };  // int cos(m t / 2)
  return 0.5 * (s(a + b) + s(std::abs(a - b)));
}

}  // namespace

TEST_CASE("spectrum formula values") {
  CHECK(mu_exact(0, 2) == 0.0);
  CHECK(mu_exact(0, 5) == 0.0);
  CHECK(mu_exact(1, 3) == 0.75);
  CHECK(mu_exact(2, 2) == 1.0);
  CHECK(mu_exact(4, 3) == 6.0);
}

TEST_CASE("circle basis is orthonormal with zero end derivatives") {
  const SpectralBasis b = basis_circle(8);
  CHECK(b.entries.size() == 9);
  const auto& rule = quad::gauss_legendre(40);
  for (const auto& e1 : b.entries) {
    REQUIRE(e1.circle.has_value());
    CHECK(e1.mu == mu_exact(e1.k, 2));
    CHECK(std::abs(e1.circle->derivative(0.0)) < 1e-14);
    CHECK(std::abs(e1.circle->derivative(2 * pi)) < 1e-12);
    for (const auto& e2 : b.entries) {
      double g = 0.0;
      for (int p = 0; p < 16; ++p)
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          const double t = (p + 0.5 * (rule.nodes[q] + 1.0)) * 2 * pi / 16;
          g += rule.weights[q] * 0.5 * 2 * pi / 16 * e1.circle->value(t) * e2.circle->value(t);
        }
      const double want = gram_oracle(e1.k, e2.k) * e1.circle->norm_factor() * e2.circle->norm_factor();
      CHECK(std::abs(want - (e1.k == e2.k ? 1.0 : 0.0)) < 1e-12);
      CHECK(std::abs(g - want) < 1e-10);
    }
  }
  CHECK(b.entries[0].circle->value(1.0) == doctest::Approx(1.0 / std::sqrt(2 * pi)));
  CHECK(b.entries[1].circle->norm_factor() == doctest::Approx(1.0 / std::sqrt(pi)));
}

TEST_CASE("eigenvalue clustering assigns formula indices") {
  std::vector<int> assignment;
  const auto c = cluster_eigenvalues({0.0, 0.74, 0.76, 2.01, 1.98, 3.8, 3.0}, 3, &assignment);
  CHECK(assignment[0] == 0);
  CHECK(assignment[1] == 1);
  CHECK(assignment[3] == 2);
  CHECK(assignment[5] == 3);
  CHECK(assignment[6] == -1);
  REQUIRE(c.size() >= 4);
  CHECK(c[1].size == 2);
  CHECK(c[1].mean == doctest::Approx(0.75));
}

TEST_CASE("slit sphere spectrum at resolution 64") {
  const SpectralBasis& b = sphere64();
  REQUIRE(b.entries.size() == 12);
  CHECK(std::abs(b.entries[0].mu) < 1e-10);
  CHECK(b.multiplicity(0) == 1);
  const Eigen::VectorXd& c = b.entries[0].nodal;
  CHECK((c.array() - c[0]).abs().maxCoeff() < 1e-8);
  CHECK(b.entries[1].mu == doctest::Approx(0.75).epsilon(0.02));
  for (const auto& cl : b.clusters)
    if (cl.k <= 4) CHECK(cl.relative_error() <= 0.03);
  for (std::size_t i = 1; i < b.entries.size(); ++i) CHECK(b.entries[i].mu >= b.entries[i - 1].mu);
}

TEST_CASE("eigenvectors are mass-orthonormal and Rayleigh-consistent") {
  const SpectralBasis& b = sphere64();
  const SurfaceSystem s = assemble_surface(*b.mesh);
  for (std::size_t i = 0; i < b.entries.size(); ++i) {
    const auto& x = b.entries[i].nodal;
    const double rq = x.dot(s.stiffness * x) / x.dot(s.mass * x);
    CHECK(std::abs(rq - b.entries[i].mu) <= 1e-10);
    CHECK(b.entries[i].residual <= 1e-10);
    for (std::size_t j = 0; j < b.entries.size(); ++j)
      CHECK(std::abs(x.dot(s.mass * b.entries[j].nodal) - (i == j ? 1.0 : 0.0)) <= 1e-8);
  }
}

TEST_CASE("surface assembly is identical serial and parallel") {
  const auto m = sphere(32);
  const SurfaceSystem a = assemble_surface(*m, Execution::serial);
  const SurfaceSystem p = assemble_surface(*m, Execution::parallel);
  CHECK((a.stiffness - p.stiffness).norm() == 0.0);
  CHECK((a.mass - p.mass).norm() == 0.0);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(m->vertices.size());
  CHECK((a.stiffness * one).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(one.dot(a.mass * one) == doctest::Approx(inspect_mesh(*m).area).epsilon(1e-12));
}

TEST_CASE("eigensolver is deterministic") {
  const auto m = sphere(24);
  const SpectralBasis a = eigensolve_slit_sphere(m, 6);
  const SpectralBasis b = eigensolve_slit_sphere(m, 6);
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].mu == b.entries[i].mu);
    CHECK(a.entries[i].nodal == b.entries[i].nodal);
  }
  CHECK_THROWS_AS(eigensolve_slit_sphere(m, 13), InvalidArgument);
}

TEST_CASE("traces on both sides of the cut do not vanish") {
  const SpectralBasis& b = sphere64();
  // Constant mode: 1/sqrt(4 pi) on a cut of length pi.
  const SideTraceNorms c = side_trace_norms(b, b.entries[0]);
  CHECK(c.upper == doctest::Approx(std::sqrt(pi / (4 * pi))).epsilon(0.01));
  CHECK(c.lower == doctest::Approx(c.upper).epsilon(1e-10));
  const SideTraceNorms k1 = side_trace_norms(b, b.entries[1]);
  CHECK(k1.upper > 0.1);
  CHECK(k1.lower > 0.1);
  for (const auto& e : b.entries) CHECK(trace_nonvanishing_check(b, e) > 0.0);
}

TEST_CASE("trace norm is stable under refinement") {
  const SpectralBasis coarse = eigensolve_slit_sphere(sphere(32), 2);
  const SpectralBasis& fine = sphere64();
  const double a = trace_nonvanishing_check(coarse, coarse.entries[1]);
  const double b = trace_nonvanishing_check(fine, fine.entries[1]);
  CHECK(std::abs(a - b) <= 0.1 * b);
}

TEST_CASE("homogeneous extension residual is at discretization level") {
  const SpectralBasis& b = sphere64();
  for (const auto& e : b.entries)
    if (e.k >= 0) CHECK(homogeneity_residual(b, e, e.k) <= 0.05 * (1.0 + mu_exact(e.k, 3)));
  // The wrong degree leaves an order-one residual.
  CHECK(homogeneity_residual(b, b.entries[1], 3) > 0.5);
}

TEST_CASE("spectral tables") {
  const SpectralBasis& b = sphere64();
  const std::string s = spectrum_to_csv(b);
  const std::string c = clusters_to_csv(b);
  CHECK(std::count(s.begin(), s.end(), '\n') == 13);
  CHECK(std::count(c.begin(), c.end(), '\n') == static_cast<long>(b.clusters.size() + 1));
}
