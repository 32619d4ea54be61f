#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace crackfreq {

/// Serial reference kernel or the OpenMP-parallel one. Both must produce
/// bit-identical results; the serial path is kept for tests and benchmarks.
enum class Execution { serial, parallel };

/// One term c * prod_j y'_j^{p_j} of a crack profile polynomial.
struct Monomial {
  double coeff = 0.0;
  std::vector<int> powers;  // one exponent per y' coordinate (N - 2 of them)
};

/// The crack profile g : R^{N-2} -> R. The crack is {x_N = 0, x_{N-1} >= g(x')}.
/// For N = 2 the profile is empty and the crack is the positive x_1 half-line.
class CrackProfile {
 public:
  using Scalar = std::function<double(const Eigen::VectorXd&)>;
  using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  /// g = 0 (a flat half-plane crack); for N = 2 the trivial half-line profile.
  static CrackProfile flat(int dimension);
  /// Polynomial profile; derivatives are analytic.
  static CrackProfile polynomial(int dimension, std::vector<Monomial> terms,
                                 double lipschitz_grad_bound = 0.0);
  /// Arbitrary profile. `gradient` may be empty, in which case it is taken by
  /// central differences.
  static CrackProfile custom(int dimension, Scalar g, Gradient gradient,
                             double lipschitz_grad_bound);

  int dimension() const { return dimension_; }
  double lipschitz_grad_bound() const { return lipschitz_; }
  bool is_polynomial() const { return polynomial_; }
  bool is_flat() const;
  const std::vector<Monomial>& terms() const { return terms_; }

  double value(const Eigen::VectorXd& yprime) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& yprime) const;
  /// Only available for polynomial profiles.
  Eigen::MatrixXd hessian(const Eigen::VectorXd& yprime) const;

 private:
  int dimension_ = 2;
  double lipschitz_ = 0.0;
  bool polynomial_ = true;
  std::vector<Monomial> terms_;
  Scalar g_;
  Gradient grad_;
};

enum class DerivativeMode { finite_difference, analytic };

/// Crack-straightening map F(y', y_{N-1}, y_N) = (y', y_{N-1} + g(y'), y_N) on
/// B_{r1}, and the coefficient fields derived from it. Evaluators are pure.
class CrackGeometry {
 public:
  CrackGeometry(CrackProfile profile, double r1);

  int dimension() const { return profile_.dimension(); }
  double r1() const { return r1_; }
  const CrackProfile& profile() const { return profile_; }
  /// A == Id everywhere (N = 2, or a flat profile).
  bool is_identity() const { return identity_; }

  Eigen::VectorXd map(const Eigen::VectorXd& y) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& y) const;
  double det_jacobian(const Eigen::VectorXd& y) const;
  /// A = |det J_F| J_F^{-1} J_F^{-T}.
  Eigen::MatrixXd coefficient(const Eigen::VectorXd& y) const;
  /// Partial derivative of A with respect to y_i.
  Eigen::MatrixXd coefficient_derivative(const Eigen::VectorXd& y, int i,
                                         DerivativeMode mode) const;

  /// Finite-difference step used for every derivative of A and beta.
  static constexpr double fd_step = 1e-6;

 private:
  Eigen::VectorXd padded_gradient(const Eigen::VectorXd& y) const;

  CrackProfile profile_;
  double r1_;
  bool identity_;
};

/// Validates the profile (g(0) = 0, grad g(0) = 0 within 1e-10) and r1 > 0.
CrackGeometry build_geometry(CrackProfile profile, double r1);

struct MuBeta {
  double mu;
  Eigen::VectorXd beta;
};

/// mu = A y . y / |y|^2 and beta = A y / mu. Rejects y = 0.
MuBeta eval_mu_beta(const CrackGeometry& geom, const Eigen::VectorXd& y);

/// (dA(y) z z)_i = sum_{h,k} d a_{kh} / d y_i z_h z_k.
Eigen::VectorXd eval_dA(const CrackGeometry& geom, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& z,
                        DerivativeMode mode = DerivativeMode::finite_difference);

/// div beta by central differences.
double div_beta(const CrackGeometry& geom, const Eigen::VectorXd& y);

/// Result of checking the coefficient bounds on random samples of B_{r1}.
struct GeometryAudit {
  int samples = 0;
  double max_asymmetry = 0.0;           // max |A - A^T|
  double min_quadratic_form = 0.0;      // min A z . z over unit z
  double max_quadratic_form = 0.0;
  double min_mu = 0.0;
  double max_mu = 0.0;
  double max_block_error = 0.0;         // max |A e_N - det J e_N|
  double max_det_deviation = 0.0;       // max |det J - 1|
  double max_trace_map_error = 0.0;     // max |F(y',0,0) - (y', g(y'), 0)|
  int ellipticity_violations = 0;
  int mu_violations = 0;
  /// Largest |y| among samples violating any bound; nullopt when clean.
  std::optional<double> largest_violating_radius;
};

GeometryAudit audit_geometry(const CrackGeometry& geom, int samples, std::uint64_t seed,
                             Execution exec = Execution::parallel);

/// Structured-text (JSON) form {dimension, g: [{coeff, powers}], r1}.
std::string profile_to_json(const CrackProfile& profile, double r1);
/// Inverse of profile_to_json. `g` may also be a plain coefficient list
/// [c0, c1, ...] in y_1 when dimension == 3.
std::pair<CrackProfile, double> profile_from_json(const std::string& text);

}  // namespace crackfreq
