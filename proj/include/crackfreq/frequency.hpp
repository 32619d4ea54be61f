#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "crackfreq/exact.hpp"
#include "crackfreq/fem.hpp"
#include "crackfreq/geometry.hpp"
#include "crackfreq/source.hpp"

namespace crackfreq {

/// Height H, energy E and frequency N = E / H sampled at increasing radii.
struct FrequencyTrace {
  std::vector<double> radii;
  std::vector<double> H;
  std::vector<double> E;
  std::vector<double> N;  // NaN where H <= 0
  int dimension = 2;
  double domain_radius = 1.0;
  double epsilon = 1.0;
  /// Remainder exponent 4 eps / (dimension + 2 eps).
  double delta = 1.0;
  double gamma_estimate = std::numeric_limits<double>::quiet_NaN();
  double monotonicity_constant = std::numeric_limits<double>::quiet_NaN();
};

double remainder_exponent(double epsilon, int dimension = 2);

struct TraceOptions {
  int angles = 256;
  /// Arc samples per full turn used to close clipped triangles.
  int arc_samples = 2048;
  /// Graded layers required inside every radius.
  int min_layers = 8;
  /// Overrides the potential's epsilon in the remainder exponent when set.
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  AssemblyOptions assembly{};
  Execution exec = Execution::parallel;
};

/// H(r) = r^{1-N} int_{dB_r} mu U^2 by the trapezoid rule over `angles`
/// intervals; theta = 0 reads the upper face, theta = 2 pi the lower.
double height(const SolutionSource& u, const CrackGeometry& geom, double r, int angles = 256);

/// r^{2-N} int_{dB_r} U dU/dnu, the boundary form of E for f = 0, A = Id.
double boundary_flux_energy(const SolutionSource& u, double r, int angles = 256);

/// H, E, N of a finite-element field. E clips straddling triangles against
/// the disk of radius r.
FrequencyTrace compute_trace(const Field& field, const CrackGeometry& geom, const Potential& f,
                             const std::vector<double>& radii, const TraceOptions& opts = {});

/// Trace of a closed form (mu = 1, A = Id) from closed_form_HEN.
FrequencyTrace closed_form_trace(const CrackHarmonic& u, const std::vector<double>& radii,
                                 double domain_radius = 1.0, double epsilon = 1.0);
FrequencyTrace closed_form_trace(const BesselMode& u, const std::vector<double>& radii,
                                 double domain_radius = 1.0, double epsilon = 1.0);

/// Synthetic trace with given N values and H = 1 (for auditing tests).
FrequencyTrace synthetic_trace(std::vector<double> radii, std::vector<double> N, double delta,
                               double domain_radius = 1.0);

/// ||f||_{L^{N/2+eps}(B_r)} r^{4 eps / (N + 2 eps)} with the Sobolev
/// constant set to 1, so only relative comparisons are meaningful.
double eta_gauge(const Potential& f, double r, double epsilon, int dimension = 2);

struct MonotonicityAudit {
  double fitted_C = 0.0;
  /// Index pairs (i, i + 1) where N + C r^delta decreases by more than the
  /// violation slack.
  std::vector<std::pair<int, int>> violations;
};

/// Smallest C >= 0 making N(r) + C r^delta nondecreasing across consecutive
/// samples up to `slack`.
MonotonicityAudit audit_monotonicity(const FrequencyTrace& trace, double slack = 1e-3,
                                     double violation_slack = 0.0);

struct GammaEstimate {
  double gamma = 0.0;
  int k0 = 0;
};

/// Extrapolates N to r = 0 from the three smallest radii assuming
/// N = gamma + a r^delta + b r^{2 delta}. Throws HeightNotPositive,
/// HalfIntegerMismatch.
GammaEstimate estimate_gamma(const FrequencyTrace& trace);

struct HGrowth {
  double upper_alpha = 0.0;     // max H(r) / r^{2 gamma}
  double limit_estimate = 0.0;  // extrapolated H(r) / r^{2 gamma} at 0
};

/// Throws NonPositiveLimit if the extrapolated limit is not positive.
HGrowth audit_H_growth(const FrequencyTrace& trace, double gamma);

struct DoublingAudit {
  /// Smallest C1 with H(T r) / H(r) in [1 / C1, C1] for all sample pairs
  /// with 1 < T <= 2.
  double C1 = 1.0;
  /// H(2 r) / H(r) for sample pairs exactly a factor 2 apart.
  std::vector<double> ratios_at_2;
};

DoublingAudit audit_doubling(const FrequencyTrace& trace);

/// "r,H,E,N,H_over_r2gamma" table.
std::string trace_to_csv(const FrequencyTrace& trace, double gamma);

}  // namespace crackfreq
