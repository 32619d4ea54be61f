#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace crackfreq::quad {

struct Rule1D {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `n` points on [-1, 1]; cached per n.
const Rule1D& gauss_legendre(int n);

/// Integral of `f` over [a, b] with an `n`-point Gauss-Legendre rule.
double gauss(const std::function<double(double)>& f, double a, double b, int n);

/// Composite Gauss-Legendre over `panels` equal sub-intervals of [a, b].
double gauss_composite(const std::function<double(double)>& f, double a, double b,
                       int panels, int n);

/// Adaptive Simpson with absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 50);

/// Integral of `f` over (0, r] for integrands with an integrable, non-smooth
/// endpoint at 0: geometric panels [r 2^{-(m+1)}, r 2^{-m}] accumulating
/// toward 0, plus a geometric-series tail estimate from the last two panels.
double graded_to_zero(const std::function<double(double)>& f, double r, int panels = 60,
                      int points = 10);

/// Node/weight pairs of the graded rule on (0, r], for callers that need to
/// evaluate a vector-valued integrand once per node.
struct Graded {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Graded graded_nodes(double r, int panels = 48, int points = 10);

/// Barycentric quadrature on a triangle: weights sum to 1 (multiply by area).
struct TriangleRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weights;
};

/// Three interior points, exact for degree 2.
const TriangleRule& triangle_degree2();
/// Seven points (Strang-Fix / Dunavant), exact for degree 5.
const TriangleRule& triangle_degree5();

}  // namespace crackfreq::quad
