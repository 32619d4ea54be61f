#include "crackfreq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <random>

#include "crackfreq/errors.hpp"

namespace crackfreq {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace

// ---------------------------------------------------------------- profile

CrackProfile CrackProfile::flat(int dimension) {
  return polynomial(dimension, {}, 0.0);
}

CrackProfile CrackProfile::polynomial(int dimension, std::vector<Monomial> terms,
                                      double lipschitz_grad_bound) {
  if (dimension < 2) throw InvalidArgument("crack profile: dimension must be >= 2");
  if (dimension == 2 && !terms.empty())
    throw InvalidArgument("crack profile: N = 2 admits only the trivial half-line profile");
  for (const auto& t : terms) {
    if (static_cast<int>(t.powers.size()) != dimension - 2)
      throw InvalidArgument("crack profile: monomial needs one exponent per y' coordinate");
    for (int p : t.powers)
      if (p < 0) throw InvalidArgument("crack profile: negative exponent");
  }
  CrackProfile prof;
  prof.dimension_ = dimension;
  prof.lipschitz_ = lipschitz_grad_bound;
  prof.polynomial_ = true;
  prof.terms_ = std::move(terms);
  return prof;
}

CrackProfile CrackProfile::custom(int dimension, Scalar g, Gradient gradient,
                                  double lipschitz_grad_bound) {
  if (dimension < 3) throw InvalidArgument("crack profile: custom profiles need N >= 3");
  if (!g) throw InvalidArgument("crack profile: empty g");
  CrackProfile prof;
  prof.dimension_ = dimension;
  prof.lipschitz_ = lipschitz_grad_bound;
  prof.polynomial_ = false;
  prof.g_ = std::move(g);
  prof.grad_ = std::move(gradient);
  return prof;
}

bool CrackProfile::is_flat() const {
  if (!polynomial_) return false;
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Monomial& m) { return m.coeff == 0.0; });
}

double CrackProfile::value(const Eigen::VectorXd& yp) const {
  if (!polynomial_) return g_(yp);
  double sum = 0.0;
  for (const auto& t : terms_) {
    double term = t.coeff;
    for (std::size_t j = 0; j < t.powers.size(); ++j) term *= ipow(yp[j], t.powers[j]);
    sum += term;
  }
  return sum;
}

Eigen::VectorXd CrackProfile::gradient(const Eigen::VectorXd& yp) const {
  const int m = dimension_ - 2;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(m);
  if (!polynomial_) {
    if (grad_) return grad_(yp);
    constexpr double h = CrackGeometry::fd_step;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd a = yp, b = yp;
      a[j] += h;
      b[j] -= h;
      grad[j] = (g_(a) - g_(b)) / (2.0 * h);
    }
    return grad;
  }
  for (const auto& t : terms_) {
    for (int j = 0; j < m; ++j) {
      if (t.powers[j] == 0) continue;
      double term = t.coeff * t.powers[j];
      for (int l = 0; l < m; ++l)
        term *= ipow(yp[l], l == j ? t.powers[l] - 1 : t.powers[l]);
      grad[j] += term;
    }
  }
  return grad;
}

Eigen::MatrixXd CrackProfile::hessian(const Eigen::VectorXd& yp) const {
  if (!polynomial_) throw InvalidArgument("crack profile: analytic Hessian needs a polynomial");
  const int m = dimension_ - 2;
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m, m);
  for (const auto& t : terms_) {
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        std::vector<int> p = t.powers;
        double c = t.coeff * p[a];
        if (c == 0.0) continue;
        p[a] -= 1;
        c *= p[b];
        if (c == 0.0) continue;
        p[b] -= 1;
        for (int l = 0; l < m; ++l) c *= ipow(yp[l], p[l]);
        hess(a, b) += c;
      }
    }
  }
  return hess;
}

// --------------------------------------------------------------- geometry

CrackGeometry::CrackGeometry(CrackProfile profile, double r1)
    : profile_(std::move(profile)), r1_(r1) {
  identity_ = profile_.dimension() == 2 || profile_.is_flat();
}

Eigen::VectorXd CrackGeometry::padded_gradient(const Eigen::VectorXd& y) const {
  const int n = dimension();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  if (identity_) return b;
  b.head(n - 2) = profile_.gradient(y.head(n - 2));
  return b;
}

Eigen::VectorXd CrackGeometry::map(const Eigen::VectorXd& y) const {
  Eigen::VectorXd x = y;
  const int n = dimension();
  if (n >= 3) x[n - 2] += profile_.value(y.head(n - 2));
  return x;
}

Eigen::MatrixXd CrackGeometry::jacobian(const Eigen::VectorXd& y) const {
  const int n = dimension();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(n, n);
  if (!identity_) jac.row(n - 2) += padded_gradient(y).transpose();
  return jac;
}

double CrackGeometry::det_jacobian(const Eigen::VectorXd&) const {
  // J_F is unit lower triangular for the shear map.
  return 1.0;
}

Eigen::MatrixXd CrackGeometry::coefficient(const Eigen::VectorXd& y) const {
  const int n = dimension();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  if (identity_) return a;
  // J^{-1} = I - e b^T with e = e_{N-1}, b . e = 0, hence
  // A = I - e b^T - b e^T + |b|^2 e e^T.
  const Eigen::VectorXd b = padded_gradient(y);
  const int e = n - 2;
  a.row(e) -= b.transpose();
  a.col(e) -= b;
  a(e, e) += b.squaredNorm();
  return a;
}

Eigen::MatrixXd CrackGeometry::coefficient_derivative(const Eigen::VectorXd& y, int i,
                                                      DerivativeMode mode) const {
  const int n = dimension();
  if (i < 0 || i >= n) throw InvalidArgument("coefficient_derivative: index out of range");
  if (identity_) return Eigen::MatrixXd::Zero(n, n);
  if (mode == DerivativeMode::analytic) {
    if (!profile_.is_polynomial())
      throw InvalidArgument("analytic derivatives of A need a polynomial profile");
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    if (i >= n - 2) return d;  // A depends on y' only
    const Eigen::VectorXd b = padded_gradient(y);
    Eigen::VectorXd db = Eigen::VectorXd::Zero(n);
    db.head(n - 2) = profile_.hessian(y.head(n - 2)).col(i);
    const int e = n - 2;
    d.row(e) -= db.transpose();
    d.col(e) -= db;
    d(e, e) += 2.0 * b.dot(db);
    return d;
  }
  Eigen::VectorXd yp = y, ym = y;
  yp[i] += fd_step;
  ym[i] -= fd_step;
  return (coefficient(yp) - coefficient(ym)) / (2.0 * fd_step);
}

CrackGeometry build_geometry(CrackProfile profile, double r1) {
  if (!(r1 > 0.0)) throw InvalidArgument("build_geometry: r1 must be positive");
  const int n = profile.dimension();
  if (n >= 3) {
    const Eigen::VectorXd origin = Eigen::VectorXd::Zero(n - 2);
    if (std::abs(profile.value(origin)) > 1e-10)
      throw InvalidArgument("build_geometry: profile must satisfy g(0) = 0");
    // Finite-difference gradient at the origin, independent of any analytic one.
    constexpr double h = 1e-6;
    for (int j = 0; j < n - 2; ++j) {
      Eigen::VectorXd a = origin, b = origin;
      a[j] += h;
      b[j] -= h;
      const double d = (profile.value(a) - profile.value(b)) / (2.0 * h);
      if (std::abs(d) > 1e-10)
        throw InvalidArgument("build_geometry: profile must satisfy grad g(0) = 0");
    }
  }
  return CrackGeometry(std::move(profile), r1);
}

MuBeta eval_mu_beta(const CrackGeometry& geom, const Eigen::VectorXd& y) {
  const double norm2 = y.squaredNorm();
  if (norm2 == 0.0) throw InvalidArgument("eval_mu_beta: mu is not evaluated at y = 0");
  if (geom.is_identity()) return {1.0, y};
  const Eigen::VectorXd ay = geom.coefficient(y) * y;
  const double mu = ay.dot(y) / norm2;
  return {mu, ay / mu};
}

Eigen::VectorXd eval_dA(const CrackGeometry& geom, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& z, DerivativeMode mode) {
  const int n = geom.dimension();
  if (y.size() != n || z.size() != n) throw InvalidArgument("eval_dA: dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (geom.is_identity()) return out;
  for (int i = 0; i < n; ++i) out[i] = z.dot(geom.coefficient_derivative(y, i, mode) * z);
  return out;
}

double div_beta(const CrackGeometry& geom, const Eigen::VectorXd& y) {
  const int n = geom.dimension();
  if (geom.is_identity()) return n;
  constexpr double h = CrackGeometry::fd_step;
  double div = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd yp = y, ym = y;
    yp[i] += h;
    ym[i] -= h;
    div += (eval_mu_beta(geom, yp).beta[i] - eval_mu_beta(geom, ym).beta[i]) / (2.0 * h);
  }
  return div;
}

// ------------------------------------------------------------------ audit

namespace {

struct SampleResult {
  double radius;
  double asym;
  double qform;
  double mu;
  double block;
  double det_dev;
  double trace_err;
};

SampleResult check_sample(const CrackGeometry& geom, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& z, const Eigen::VectorXd& yprime) {
  const int n = geom.dimension();
  const Eigen::MatrixXd a = geom.coefficient(y);
  SampleResult s{};
  s.radius = y.norm();
  s.asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  s.qform = z.dot(a * z);
  s.mu = s.radius > 0.0 ? eval_mu_beta(geom, y).mu : 1.0;
  const double det = geom.det_jacobian(y);
  s.block = (a.col(n - 1) - det * Eigen::VectorXd::Unit(n, n - 1)).cwiseAbs().maxCoeff();
  s.det_dev = std::abs(det - 1.0);
  if (n >= 3) {
    Eigen::VectorXd on_edge = Eigen::VectorXd::Zero(n);
    on_edge.head(n - 2) = yprime;
    Eigen::VectorXd expect = on_edge;
    expect[n - 2] = geom.profile().value(yprime);
    s.trace_err = (geom.map(on_edge) - expect).cwiseAbs().maxCoeff();
  }
  return s;
}

}  // namespace

GeometryAudit audit_geometry(const CrackGeometry& geom, int samples, std::uint64_t seed,
                             Execution exec) {
  if (samples <= 0) throw InvalidArgument("audit_geometry: samples must be positive");
  const int n = geom.dimension();
  // Samples are drawn serially so both execution paths see the same points.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_direction = [&](int dim) {
    Eigen::VectorXd v(dim);
    do {
      for (int i = 0; i < dim; ++i) v[i] = normal(rng);
    } while (v.norm() == 0.0);
    return Eigen::VectorXd(v / v.norm());
  };
  std::vector<Eigen::VectorXd> ys(samples), zs(samples), yps(samples);
  for (int s = 0; s < samples; ++s) {
    const double rad = geom.r1() * std::pow(unit(rng), 1.0 / n) * (1.0 - 1e-12);
    ys[s] = rad * random_direction(n);
    zs[s] = random_direction(n);
    if (n >= 3) {
      const double rp = geom.r1() * std::pow(unit(rng), 1.0 / (n - 2)) * (1.0 - 1e-12);
      yps[s] = rp * random_direction(n - 2);
    }
  }

  std::vector<SampleResult> results(samples);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (int s = 0; s < samples; ++s) results[s] = check_sample(geom, ys[s], zs[s], yps[s]);
  } else {
    for (int s = 0; s < samples; ++s) results[s] = check_sample(geom, ys[s], zs[s], yps[s]);
  }

  GeometryAudit audit;
  audit.samples = samples;
  audit.min_quadratic_form = audit.min_mu = std::numeric_limits<double>::infinity();
  audit.max_quadratic_form = audit.max_mu = -std::numeric_limits<double>::infinity();
  for (const auto& s : results) {
    audit.max_asymmetry = std::max(audit.max_asymmetry, s.asym);
    audit.min_quadratic_form = std::min(audit.min_quadratic_form, s.qform);
    audit.max_quadratic_form = std::max(audit.max_quadratic_form, s.qform);
    audit.min_mu = std::min(audit.min_mu, s.mu);
    audit.max_mu = std::max(audit.max_mu, s.mu);
    audit.max_block_error = std::max(audit.max_block_error, s.block);
    audit.max_det_deviation = std::max(audit.max_det_deviation, s.det_dev);
    audit.max_trace_map_error = std::max(audit.max_trace_map_error, s.trace_err);
    const bool bad_ellip = s.qform < 0.5 || s.qform > 2.0;
    const bool bad_mu = s.mu < 0.5 || s.mu > 2.0;
    audit.ellipticity_violations += bad_ellip;
    audit.mu_violations += bad_mu;
    if (bad_ellip || bad_mu || s.asym > 1e-12)
      audit.largest_violating_radius =
          std::max(audit.largest_violating_radius.value_or(0.0), s.radius);
  }
  return audit;
}

// ---------------------------------------------------------- serialization

std::string profile_to_json(const CrackProfile& profile, double r1) {
  if (!profile.is_polynomial())
    throw InvalidArgument("profile_to_json: only polynomial profiles are serializable");
  nlohmann::json j;
  j["dimension"] = profile.dimension();
  j["r1"] = r1;
  j["lipschitz_grad_bound"] = profile.lipschitz_grad_bound();
  j["g"] = nlohmann::json::array();
  for (const auto& t : profile.terms()) j["g"].push_back({{"coeff", t.coeff}, {"powers", t.powers}});
  return j.dump(2);
}

std::pair<CrackProfile, double> profile_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("profile_from_json: ") + e.what());
  }
  for (const auto& [key, _] : j.items())
    if (key != "dimension" && key != "r1" && key != "g" && key != "lipschitz_grad_bound")
      throw InvalidArgument("profile_from_json: unknown key '" + key + "'");
  if (!j.contains("dimension") || !j.contains("r1"))
    throw InvalidArgument("profile_from_json: dimension and r1 are required");
  const int dim = j.at("dimension").get<int>();
  const double r1 = j.at("r1").get<double>();
  std::vector<Monomial> terms;
  if (j.contains("g")) {
    const auto& g = j.at("g");
    if (!g.is_array()) throw InvalidArgument("profile_from_json: g must be a list");
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const auto& item = g[idx];
      if (item.is_number()) {
        if (dim != 3)
          throw InvalidArgument("profile_from_json: coefficient lists need dimension 3");
        if (item.get<double>() != 0.0)
          terms.push_back({item.get<double>(), {static_cast<int>(idx)}});
      } else {
        terms.push_back({item.at("coeff").get<double>(), item.at("powers").get<std::vector<int>>()});
      }
    }
  }
  const double lip = j.value("lipschitz_grad_bound", 0.0);
  return {CrackProfile::polynomial(dim, std::move(terms), lip), r1};
}

}  // namespace crackfreq
