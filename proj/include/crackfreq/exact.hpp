#pragma once

#include <Eigen/Dense>

#include "crackfreq/slitmesh.hpp"

namespace crackfreq {

/// J_{order_twice / 2}(x) for x >= 0. Half-integer orders use the closed
/// trigonometric forms (upward recurrence from j_0, j_1) away from 0 and the
/// power series near 0; integer orders defer to std::cyl_bessel_j.
double bessel_J_half_integer(int order_twice, double x);

/// amplitude * r^{k/2} cos(k theta / 2), theta in [0, 2 pi] from the upper face.
struct CrackHarmonic {
  int k = 1;
  double amplitude = 1.0;
};

/// amplitude * J_{k/2}(sqrt(lambda) r) cos(k theta / 2); solves
/// -Laplace u = lambda u with Neumann conditions on both faces of the slit.
struct BesselMode {
  int k = 1;
  double lambda = 1.0;
  double amplitude = 1.0;
};

struct ValueGradient {
  double value = 0.0;
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
};

/// Throws GradientSingular at the tip when k is odd.
ValueGradient eval(const CrackHarmonic& u, const Eigen::Vector2d& p, Side side);
ValueGradient eval(const BesselMode& u, const Eigen::Vector2d& p, Side side);

double value(const CrackHarmonic& u, const Eigen::Vector2d& p, Side side);
double value(const BesselMode& u, const Eigen::Vector2d& p, Side side);

struct HEN {
  double H = 0.0;
  double E = 0.0;
  double N = 0.0;
};

/// Height, energy and frequency of the closed form on B_r (mu = 1, A = Id).
/// The angular integrals are exact; the radial energy integral is adaptive.
HEN closed_form_HEN(const CrackHarmonic& u, double r);
HEN closed_form_HEN(const BesselMode& u, double r);

}  // namespace crackfreq
