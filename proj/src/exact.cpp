#include "crackfreq/exact.hpp"

#include <cmath>
#include <numbers>

#include "crackfreq/errors.hpp"
#include "crackfreq/locator.hpp"
#include "crackfreq/quadrature.hpp"

namespace crackfreq {

namespace {

constexpr double kPi = std::numbers::pi;

// Spherical Bessel j_n(x) = sqrt(pi / (2x)) J_{n+1/2}(x).
double spherical_series(int n, double x) {
  // x^n / (2n+1)!! * sum_m (-x^2/2)^m / (m! (2n+3)(2n+5)...(2n+2m+1))
  double lead = 1.0;
  for (int j = 1; j <= n; ++j) lead *= x / (2.0 * j + 1.0);
  const double q = -0.5 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int m = 1; m < 200; ++m) {
    term *= q / (m * (2.0 * n + 2.0 * m + 1.0));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return lead * sum;
}

double spherical_bessel(int n, double x) {
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (x < n + 2.0) return spherical_series(n, x);
  double jm = std::sin(x) / x;
  if (n == 0) return jm;
  double j = std::sin(x) / (x * x) - std::cos(x) / x;
  for (int l = 1; l < n; ++l) {
    const double next = (2.0 * l + 1.0) / x * j - jm;
    jm = j;
    j = next;
  }
  return j;
}

// d/dr of the radial profile R(r) and R itself.
struct Radial {
  double R;
  double dR;
};

Radial harmonic_radial(const CrackHarmonic& u, double r) {
  const double nu = 0.5 * u.k;
  if (u.k == 0) return {u.amplitude, 0.0};
  if (r == 0.0) return {0.0, u.k == 2 ? u.amplitude : 0.0};
  const double R = u.amplitude * std::pow(r, nu);
  return {R, nu * R / r};
}

Radial bessel_radial(const BesselMode& u, double r) {
  const double s = std::sqrt(u.lambda);
  const double x = s * r;
  const double nu = 0.5 * u.k;
  const double J = bessel_J_half_integer(u.k, x);
  if (x == 0.0) {
    // J'_nu(0): 1/2 for nu = 1, 0 for nu = 0 and nu >= 3/2 (singular for 1/2).
    const double d = u.k == 2 ? 0.5 : 0.0;
    return {u.amplitude * J, u.amplitude * s * d};
  }
  // J'_nu(x) = (nu / x) J_nu(x) - J_{nu+1}(x)
  const double dJ = nu / x * J - bessel_J_half_integer(u.k + 2, x);
  return {u.amplitude * J, u.amplitude * s * dJ};
}

ValueGradient assemble(int k, const Radial& rad, const Eigen::Vector2d& p, Side side) {
  const double r = p.norm();
  if (r == 0.0 && k % 2 == 1) throw GradientSingular("eval: gradient is singular at the crack tip for odd k");
  const double theta = r == 0.0 ? 0.0 : branch_angle(p, side);
  const double half = 0.5 * k;
  const double c = std::cos(half * theta);
  const double s = std::sin(half * theta);
  ValueGradient out;
  out.value = rad.R * c;
  const Eigen::Vector2d er(std::cos(theta), std::sin(theta));
  const Eigen::Vector2d et(-std::sin(theta), std::cos(theta));
  if (r == 0.0) {
    // Smooth at the tip: only k = 2 has a nonzero gradient there, along x.
    out.gradient = rad.dR * (c * er - s * et);
    return out;
  }
  out.gradient = rad.dR * c * er - half * rad.R / r * s * et;
  return out;
}

HEN hen_from_radial(int k, double lambda, const std::function<Radial(double)>& radial, double r) {
  if (!(r > 0.0)) throw InvalidArgument("closed_form_HEN: r must be positive");
  const double ccos = k == 0 ? 2.0 * kPi : kPi;
  const double csin = k == 0 ? 0.0 : kPi;
  const double half = 0.5 * k;
  const Radial at_r = radial(r);
  HEN out;
  out.H = at_r.R * at_r.R * ccos;
  if (out.H <= 0.0) throw HeightNotPositive("closed_form_HEN: H(r) vanishes (zero amplitude or Bessel zero)");
  auto integrand = [&](double s) {
    // Integrable endpoint: evaluate the limit from just inside.
    if (s == 0.0) s = 1e-100;
    const Radial v = radial(s);
    return (v.dR * v.dR * ccos + half * half * (v.R / s) * (v.R / s) * csin - lambda * v.R * v.R * ccos) * s;
  };
  const double scale = std::max(1.0, out.H);
  out.E = quad::adaptive_simpson(integrand, 0.0, r, 1e-13 * scale);
  out.N = out.E / out.H;
  return out;
}

}  // namespace

double bessel_J_half_integer(int order_twice, double x) {
  if (order_twice < 0) throw InvalidArgument("bessel_J_half_integer: order_twice must be >= 0");
  if (x < 0.0) throw InvalidArgument("bessel_J_half_integer: x must be >= 0");
  if (order_twice % 2 == 0) return std::cyl_bessel_j(0.5 * order_twice, x);
  const int n = (order_twice - 1) / 2;
  if (x == 0.0) return 0.0;
  return std::sqrt(2.0 * x / kPi) * spherical_bessel(n, x);
}

ValueGradient eval(const CrackHarmonic& u, const Eigen::Vector2d& p, Side side) {
  if (u.k < 0) throw InvalidArgument("CrackHarmonic: k must be >= 0");
  return assemble(u.k, harmonic_radial(u, p.norm()), p, side);
}

ValueGradient eval(const BesselMode& u, const Eigen::Vector2d& p, Side side) {
  if (u.k < 0 || !(u.lambda > 0.0)) throw InvalidArgument("BesselMode: need k >= 0 and lambda > 0");
  return assemble(u.k, bessel_radial(u, p.norm()), p, side);
}

double value(const CrackHarmonic& u, const Eigen::Vector2d& p, Side side) {
  const double r = p.norm();
  const double theta = r == 0.0 ? 0.0 : branch_angle(p, side);
  return harmonic_radial(u, r).R * std::cos(0.5 * u.k * theta);
}

double value(const BesselMode& u, const Eigen::Vector2d& p, Side side) {
  const double r = p.norm();
  const double theta = r == 0.0 ? 0.0 : branch_angle(p, side);
  return u.amplitude * bessel_J_half_integer(u.k, std::sqrt(u.lambda) * r) * std::cos(0.5 * u.k * theta);
}

HEN closed_form_HEN(const CrackHarmonic& u, double r) {
  return hen_from_radial(u.k, 0.0, [&](double s) { return harmonic_radial(u, s); }, r);
}

HEN closed_form_HEN(const BesselMode& u, double r) {
  return hen_from_radial(u.k, u.lambda, [&](double s) { return bessel_radial(u, s); }, r);
}

}  // namespace crackfreq
