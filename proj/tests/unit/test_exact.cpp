#include <doctest.h>

#include <cmath>
#include <numbers>

#include "crackfreq/errors.hpp"
#include "crackfreq/exact.hpp"

using namespace crackfreq;
using Eigen::Vector2d;
constexpr double pi = std::numbers::pi;

namespace {

// Power series of J_nu(x), 40 terms; independent of the library's evaluation.
double series_J(double nu, double x) {
  double term = std::pow(0.5 * x, nu) / std::tgamma(nu + 1.0);
  double sum = term;
  for (int m = 1; m < 40; ++m) {
    term *= -0.25 * x * x / (m * (m + nu));
    sum += term;
  }
  return sum;
}

Vector2d polar(double r, double t) { return {r * std::cos(t), r * std::sin(t)}; }

}  // namespace

TEST_CASE("half-integer Bessel values") {
  CHECK(bessel_J_half_integer(1, 1.0) == doctest::Approx(0.6713967071418031).epsilon(1e-14));
  CHECK(bessel_J_half_integer(3, 1.0) == doctest::Approx(0.2402978391234270).epsilon(1e-14));
  CHECK(std::abs(bessel_J_half_integer(1, pi)) < 1e-15);
  CHECK(bessel_J_half_integer(0, 0.0) == 1.0);
  CHECK(bessel_J_half_integer(3, 0.0) == 0.0);
  CHECK_THROWS_AS(bessel_J_half_integer(1, -1.0), InvalidArgument);
}

TEST_CASE("half-integer Bessel matches the series oracle for x <= 12") {
  // The alternating series loses digits beyond x ~ 12, so the oracle stops there.
  for (int n2 = 0; n2 <= 9; ++n2)
    for (double x : {1e-3, 0.1, 0.7, 2.0, 5.0, 9.5, 12.0}) {
      const double want = series_J(0.5 * n2, x);
      const double got = bessel_J_half_integer(n2, x);
      CHECK(std::abs(got - want) <= 1e-10 * std::max(1e-3, std::abs(want)));
    }
}

TEST_CASE("half-integer Bessel three-term recurrence up to x = 20") {
  for (double x : {0.5, 3.0, 11.0, 17.0, 20.0})
    for (int n2 = 4; n2 <= 9; ++n2) {
      const double nu = 0.5 * (n2 - 2);
      const double lhs = bessel_J_half_integer(n2 - 4, x) + bessel_J_half_integer(n2, x);
      const double rhs = 2.0 * nu / x * bessel_J_half_integer(n2 - 2, x);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("crack harmonics: values on known points") {
  const CrackHarmonic k0{0, 2.5};
  CHECK(value(k0, {0.3, -0.4}, Side::upper) == 2.5);
  CHECK(eval(k0, {0.3, -0.4}, Side::upper).gradient.norm() == 0.0);
  const CrackHarmonic k2{2, 1.0};
  for (auto p : {Vector2d(0.3, 0.4), Vector2d(-0.5, -0.1), Vector2d(0.2, -0.6)}) {
    CHECK(value(k2, p, Side::upper) == doctest::Approx(p.x()).epsilon(1e-14));
    CHECK((eval(k2, p, Side::upper).gradient - Vector2d(1, 0)).norm() < 1e-14);
  }
  const CrackHarmonic k1{1, 1.0};
  CHECK(value(k1, {0.25, 0.0}, Side::upper) == doctest::Approx(0.5));
  CHECK(value(k1, {0.25, 0.0}, Side::lower) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(eval(k1, {0.0, 0.0}, Side::upper), GradientSingular);
  CHECK(eval(k2, {0.0, 0.0}, Side::upper).value == 0.0);
  const BesselMode b{1, 1.0, 1.0};
  CHECK(value(b, {1.0, 0.0}, Side::upper) == doctest::Approx(std::sqrt(2.0 / pi) * std::sin(1.0)).epsilon(1e-14));
}

TEST_CASE("gradients agree with central differences") {
  const double h = 1e-6;
  for (int k = 0; k <= 4; ++k)
    for (auto p : {polar(0.4, 0.7), polar(0.9, 2.5), polar(0.2, 5.9)}) {
      const CrackHarmonic u{k, 1.3};
      const BesselMode b{k, 2.0, 0.7};
      const Vector2d gu = eval(u, p, Side::upper).gradient;
      const Vector2d gb = eval(b, p, Side::upper).gradient;
      for (int d = 0; d < 2; ++d) {
        Vector2d e = Vector2d::Zero();
        e[d] = h;
        CHECK((value(u, p + e, Side::upper) - value(u, p - e, Side::upper)) / (2 * h) ==
              doctest::Approx(gu[d]).epsilon(1e-7));
        CHECK((value(b, p + e, Side::upper) - value(b, p - e, Side::upper)) / (2 * h) ==
              doctest::Approx(gb[d]).epsilon(1e-7));
      }
    }
}

TEST_CASE("harmonicity and Helmholtz residuals by five-point stencil") {
  for (int k = 1; k <= 4; ++k) {
    const CrackHarmonic u{k, 1.0};
    const BesselMode b{k, 3.0, 1.0};
    const Vector2d p = polar(0.5, 2.0);
    double prev_u = 0, prev_b = 0;
    for (double h : {1e-2, 5e-3}) {
      auto lap = [&](auto&& f) {
        return (f(p + Vector2d(h, 0)) + f(p - Vector2d(h, 0)) + f(p + Vector2d(0, h)) + f(p - Vector2d(0, h)) -
                4.0 * f(p)) / (h * h);
      };
      const double ru = std::abs(lap([&](Vector2d q) { return value(u, q, Side::upper); }));
      const double rb = std::abs(lap([&](Vector2d q) { return value(b, q, Side::upper); }) + 3.0 * value(b, p, Side::upper));
      if (prev_u > 0) {
        CHECK(ru < 0.3 * prev_u);  // O(h^2)
        CHECK(rb < 0.3 * prev_b);
      }
      prev_u = ru;
      prev_b = rb;
    }
  }
}

TEST_CASE("Neumann condition on both crack faces") {
  const double h = 1e-5;
  for (int k = 1; k <= 5; ++k) {
    const CrackHarmonic u{k, 1.0};
    const BesselMode b{k, 1.0, 1.0};
    const double r = 0.6;
    // Angular derivative at theta = 0 and 2 pi by one-sided differences.
    CHECK(std::abs((value(u, polar(r, h), Side::upper) - value(u, polar(r, 0.0), Side::upper)) / h) <= 1e-4);
    CHECK(std::abs((value(u, polar(r, -h), Side::lower) - value(u, polar(r, 0.0), Side::lower)) / h) <= 1e-4);
    CHECK(std::abs(eval(u, polar(r, 0.0), Side::upper).gradient.y()) <= 1e-14);
    CHECK(std::abs(eval(u, polar(r, 0.0), Side::lower).gradient.y()) <= 1e-14);
    CHECK(std::abs(eval(b, polar(r, 0.0), Side::lower).gradient.y()) <= 1e-14);
  }
}

TEST_CASE("closed-form H, E, N") {
  for (double r : {0.01, 0.3, 1.0}) {
    const HEN h = closed_form_HEN(CrackHarmonic{1, 1.0}, r);
    CHECK(h.H == doctest::Approx(pi * r).epsilon(1e-12));
    CHECK(h.E == doctest::Approx(0.5 * pi * r).epsilon(1e-10));
    CHECK(h.N == doctest::Approx(0.5).epsilon(1e-10));
  }
  const HEN c = closed_form_HEN(CrackHarmonic{0, 2.0}, 0.5);
  CHECK(c.E == 0.0);
  CHECK(c.N == 0.0);
  CHECK(c.H == doctest::Approx(8.0 * pi));
  for (int k = 1; k <= 6; ++k)
    for (double a : {1.0, 10.0, 0.01}) {
      const HEN h = closed_form_HEN(CrackHarmonic{k, a}, 0.4);
      CHECK(std::abs(h.N - 0.5 * k) <= 1e-10);
      CHECK(h.H == doctest::Approx(a * a * closed_form_HEN(CrackHarmonic{k, 1.0}, 0.4).H).epsilon(1e-13));
    }
  // Bessel: N(r) = r J'/J + ... compare with the series oracle of r * d/dr log J_{1/2}(r) = r cot r - 1/2.
  for (double r : {0.1, 0.5, 0.9}) {
    const HEN h = closed_form_HEN(BesselMode{1, 1.0, 1.0}, r);
    CHECK(h.N == doctest::Approx(r / std::tan(r) - 0.5).epsilon(1e-9));
  }
  CHECK_THROWS_AS(closed_form_HEN(CrackHarmonic{1, 0.0}, 0.5), HeightNotPositive);
}
