#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "crackfreq/fem.hpp"
#include "crackfreq/geometry.hpp"
#include "crackfreq/source.hpp"
#include "crackfreq/spectrum.hpp"

namespace crackfreq {

struct RescaledField {
  Field field;           // U(lambda y) / sqrt(H(lambda)) on the unit mesh
  double height = 0.0;   // H(lambda)
  /// Trapezoid value of int_{S^1} mu(lambda theta) W^2 over the outer ring of
  /// the unit mesh; 1 up to quadrature error.
  double normalization = 0.0;
};

/// W^lambda = U(lambda .) / sqrt(H(lambda)) at the vertices of `unit_mesh`.
/// Throws RadiusTooSmall for discrete sources with fewer than 8 layers
/// inside lambda, HeightNotPositive if H(lambda) vanishes.
RescaledField rescale(const SolutionSource& u, const CrackGeometry& geom, double lambda,
                      std::shared_ptr<const SlitMesh> unit_mesh);

/// phi_{k,i}(lambda) = int_{S^1} U(lambda theta) Y_{k,i}(theta), trapezoid
/// over `angles` intervals, one value per basis function of index k.
std::vector<double> fourier_phi(const SolutionSource& u, double lambda, const SpectralBasis& basis, int k,
                                int angles = 512);

struct UpsilonOptions {
  int radial_panels = 48;
  int radial_points = 10;
  int angular_points = 24;  // per half turn
};

/// Remainder functional: minus the (A - Id) tangential term and plus the
/// potential term over B_r, plus the (A - Id) radial flux over dB_r.
/// Throws SingularQuadrature for discrete sources with fewer than 4 graded
/// layers inside r.
double upsilon(const SolutionSource& u, const CrackGeometry& geom, const Potential& f,
               const SpectralEntry& entry, double r, const UpsilonOptions& opts = {});

/// Two algebraically equal arrangements of the correction weights: the
/// coefficient form of the Fourier expansion and a single-integral form.
enum class AlphaForm { expansion, single_integral };

/// coeff * s^power.
struct PowerTerm {
  double coeff = 0.0;
  double power = 0.0;
};

/// Weight w(s) with alpha = r^{-k0/2} phi(r) + int_0^r w(s) Upsilon(s) ds.
/// For N + k0 = 2 both forms degenerate to w(s) = 1 / s.
std::vector<PowerTerm> alpha_weight(int N, int k0, double r, AlphaForm form);

struct AlphaOptions {
  AlphaForm form = AlphaForm::expansion;
  UpsilonOptions upsilon{};
  /// Relative spread across r above which SpreadTooLarge is thrown (<= 0
  /// disables the check).
  double spread_tolerance = 0.05;
  /// Cross-check the Fubini reduction against direct nested quadrature.
  bool nested = false;
};

struct AlphaResult {
  int k0 = 0;
  std::vector<double> radii;
  std::vector<std::vector<double>> values;   // [i][r]
  std::vector<std::vector<double>> upsilon;  // [i][r]: Upsilon_{k0,i}(r)
  std::vector<double> alpha;                 // mean over radii
  std::vector<double> spread;                // max - min over radii
};

AlphaResult alpha_coefficients(const SolutionSource& u, const CrackGeometry& geom, const Potential& f,
                               const SpectralBasis& basis, int k0, const std::vector<double>& radii,
                               const AlphaOptions& opts = {});

/// Phi(y) = |y|^{k0/2} sum_i alpha_i Y_{k0,i}(y / |y|).
class BlowupLimit final : public SolutionSource {
 public:
  BlowupLimit(const SpectralBasis& basis, int k0, std::vector<double> alpha);
  double value(const Eigen::Vector2d& p, Side side) const override;
  Eigen::Vector2d gradient(const Eigen::Vector2d& p, Side side) const override;

 private:
  int k0_;
  std::vector<CircleMode> modes_;
  std::vector<double> alpha_;
};

struct BlowupOptions {
  double slack = 1.05;  // each error at most slack times the previous one
  double floor = 1e-12;  // errors below floor count as converged
  double final_threshold = std::numeric_limits<double>::infinity();
  bool strict = false;   // throw NonDecreasingError instead of flagging
  int radial_panels = 30;
  int radial_points = 8;
  int angular_points = 32;  // per half turn
};

struct BlowupReport {
  int k0 = 0;
  std::vector<double> lambdas;
  std::vector<double> value_errors;     // || lambda^{-k0/2} U(lambda .) - Phi ||_{L2(B1)}
  std::vector<double> gradient_errors;  // || lambda^{1-k0/2} grad U(lambda .) - grad Phi ||_{L2(B1)}
  std::vector<double> alpha;
  std::vector<double> alpha_spread;
  std::vector<std::vector<double>> phi;      // [lambda][i]
  std::vector<double> upsilon_radii;
  std::vector<std::vector<double>> upsilon;  // [i][r]
  double value_slope = std::numeric_limits<double>::quiet_NaN();
  double gradient_slope = std::numeric_limits<double>::quiet_NaN();
  bool value_decreasing = true;
  bool gradient_decreasing = true;
  bool final_below_threshold = true;
};

/// Compares lambda^{-k0/2} U(lambda .) with the blow-up limit on B_1 along a
/// decreasing schedule (at least 6 values).
BlowupReport verify_blowup(const SolutionSource& u, const SpectralBasis& basis, const AlphaResult& alpha,
                           const std::vector<double>& lambdas, const BlowupOptions& opts = {});

/// Geometric schedule lambda_j = first * ratio^j.
std::vector<double> lambda_schedule(double first, double ratio, int count);

/// "lambda,value_error,gradient_error" table.
std::string blowup_to_csv(const BlowupReport& report);
/// JSON summary: k0, alpha, spreads, slopes and pass flags.
std::string blowup_summary_json(const BlowupReport& report, double gamma);

}  // namespace crackfreq
