#include "crackfreq/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "crackfreq/errors.hpp"
#include "crackfreq/frequency.hpp"
#include "crackfreq/quadrature.hpp"

namespace crackfreq {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

struct AngularRule {
  std::vector<double> theta;
  std::vector<double> weight;
};

// Gauss-Legendre on [0, pi] and [pi, 2 pi]; never samples the slit itself.
AngularRule angular_rule(int per_half) {
  const auto& g = quad::gauss_legendre(per_half);
  AngularRule out;
  for (int half = 0; half < 2; ++half) {
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      out.theta.push_back(kPi * (half + 0.5 * (g.nodes[k] + 1.0)));
      out.weight.push_back(0.5 * kPi * g.weights[k]);
    }
  }
  return out;
}

const CircleMode& circle_of(const SpectralEntry& entry) {
  if (!entry.circle) throw InvalidArgument("blowup: closed-form circle eigenfunctions (N = 2) required");
  return *entry.circle;
}

Eigen::Matrix2d a_minus_id(const CrackGeometry& geom, const Eigen::Vector2d& y) {
  return geom.coefficient(Eigen::VectorXd(y)).topLeftCorner<2, 2>() - Eigen::Matrix2d::Identity();
}

// rho(t) with Upsilon(r) = int_0^r rho(t) dt + boundary(r).
double rho(const SolutionSource& u, const CrackGeometry& geom, const Potential& f, const CircleMode& Y,
           const AngularRule& ang, double t) {
  double sum = 0.0;
  for (std::size_t q = 0; q < ang.theta.size(); ++q) {
    const double th = ang.theta[q];
    const Eigen::Vector2d er(std::cos(th), std::sin(th));
    const Eigen::Vector2d et(-std::sin(th), std::cos(th));
    const Eigen::Vector2d y = t * er;
    double v = 0.0;
    if (!geom.is_identity()) v -= (a_minus_id(geom, y) * u.gradient(y, Side::upper)).dot(et) * Y.derivative(th) / t;
    if (!f.is_zero()) v += pulled_back(f, geom, y) * u.value(y, Side::upper) * Y.value(th);
    sum += ang.weight[q] * v;
  }
  return t * sum;
}

double boundary_term(const SolutionSource& u, const CrackGeometry& geom, const CircleMode& Y,
                     const AngularRule& ang, double r) {
  if (geom.is_identity()) return 0.0;
  double sum = 0.0;
  for (std::size_t q = 0; q < ang.theta.size(); ++q) {
    const double th = ang.theta[q];
    const Eigen::Vector2d er(std::cos(th), std::sin(th));
    const Eigen::Vector2d y = r * er;
    sum += ang.weight[q] * (a_minus_id(geom, y) * u.gradient(y, Side::upper)).dot(er) * Y.value(th);
  }
  return r * sum;
}

// int_t^r s^p ds
double tail_power(double p, double t, double r) {
  if (std::abs(p + 1.0) < 1e-14) return std::log(r / t);
  return (std::pow(r, p + 1.0) - std::pow(t, p + 1.0)) / (p + 1.0);
}

void require_resolved(const SolutionSource& u, double r, int layers, bool singular) {
  const SlitMesh* mesh = u.mesh();
  if (!mesh) return;
  if (mesh->layers_inside(r) < layers) {
    const std::string msg = "fewer than " + std::to_string(layers) + " mesh layers inside r";
    if (singular) throw SingularQuadrature("upsilon: " + msg);
    throw RadiusTooSmall("rescale: " + msg);
  }
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y, double floor) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] > floor) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

bool decreasing(const std::vector<double>& e, double slack, double floor) {
  for (std::size_t i = 1; i < e.size(); ++i)
    if (e[i] > floor && e[i] > slack * e[i - 1]) return false;
  return true;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RescaledField rescale(const SolutionSource& u, const CrackGeometry& geom, double lambda,
                      std::shared_ptr<const SlitMesh> unit_mesh) {
  if (!(lambda > 0.0) || lambda >= u.radius()) throw InvalidArgument("rescale: lambda must lie in (0, R)");
  if (!unit_mesh || unit_mesh->kind != SlitMesh::Kind::disk || std::abs(unit_mesh->radius - 1.0) > 1e-12)
    throw InvalidArgument("rescale: unit slit disk mesh required");
  require_resolved(u, lambda, 8, false);
  const double H = height(u, geom, lambda);
  if (!(H > 0.0)) throw HeightNotPositive("rescale: H(lambda) is not positive");
  const double scale = 1.0 / std::sqrt(H);
  Field W = interpolate(unit_mesh, [&](const Eigen::Vector2d& y, Side side) {
    return scale * u.value(lambda * y, side);
  });

  // Outer ring in branch order: upper slit copy at 0, lower copy at 2 pi.
  const SlitMesh& mesh = *unit_mesh;
  const auto theta = vertex_angles(mesh);
  std::vector<int> ring(mesh.outer_boundary_ids.begin(), mesh.outer_boundary_ids.end());
  std::sort(ring.begin(), ring.end(), [&](int a, int b) { return theta[a] < theta[b]; });
  double norm = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const int a = ring[i];
    const int b = ring[i + 1];
    const double dt = theta[b] - theta[a];
    auto term = [&](int v) {
      const Eigen::Vector2d y = lambda * mesh.vertices[v].head<2>();
      const double mu = geom.is_identity() ? 1.0 : eval_mu_beta(geom, Eigen::VectorXd(y)).mu;
      return mu * W.values()[v] * W.values()[v];
    };
    norm += 0.5 * dt * (term(a) + term(b));
  }
  return {std::move(W), H, norm};
}

std::vector<double> fourier_phi(const SolutionSource& u, double lambda, const SpectralBasis& basis, int k,
                                int angles) {
  if (!(lambda > 0.0)) throw InvalidArgument("fourier_phi: lambda must be positive");
  const auto space = basis.eigenspace(k);
  if (space.empty()) throw InvalidArgument("fourier_phi: basis does not cover k");
  std::vector<double> out;
  const double dt = kTwoPi / angles;
  for (const SpectralEntry* e : space) {
    const CircleMode& Y = circle_of(*e);
    double sum = 0.0;
    for (int j = 0; j <= angles; ++j) {
      const double t = dt * j;
      const Eigen::Vector2d p = (j == 0 || j == angles) ? Eigen::Vector2d(lambda, 0.0)
                                                        : Eigen::Vector2d(lambda * std::cos(t), lambda * std::sin(t));
      const Side side = j == angles ? Side::lower : Side::upper;
      const double w = (j == 0 || j == angles) ? 0.5 * dt : dt;
      sum += w * u.value(p, side) * Y.value(t);
    }
    out.push_back(sum);
  }
  return out;
}

double upsilon(const SolutionSource& u, const CrackGeometry& geom, const Potential& f,
               const SpectralEntry& entry, double r, const UpsilonOptions& opts) {
  if (!(r > 0.0)) throw InvalidArgument("upsilon: r must be positive");
  const CircleMode& Y = circle_of(entry);
  if (geom.is_identity() && f.is_zero()) return 0.0;
  require_resolved(u, r, 4, true);
  const AngularRule ang = angular_rule(opts.angular_points);
  const double volume = quad::graded_to_zero([&](double t) { return rho(u, geom, f, Y, ang, t); }, r,
                                             opts.radial_panels, opts.radial_points);
  return volume + boundary_term(u, geom, Y, ang, r);
}

std::vector<PowerTerm> alpha_weight(int N, int k0, double r, AlphaForm form) {
  if (N < 2 || k0 < 0) throw InvalidArgument("alpha_weight: need N >= 2 and k0 >= 0");
  if (N + k0 == 2) return {{1.0, -1.0}};
  const double n = N;
  const double k = k0;
  if (form == AlphaForm::expansion) {
    return {{(2.0 * n + k - 4.0) / (2.0 * (n + k - 2.0)), -n + 1.0 - 0.5 * k},
            {k / (2.0 * (n + k - 2.0)) * std::pow(r, -n + 2.0 - k), 0.5 * k - 1.0}};
  }
  const double inv = 1.0 / (2.0 - n - k);
  return {{inv * (2.0 - n - 0.5 * k), -(n + 0.5 * k - 1.0)},
          {-inv * k / (2.0 * std::pow(r, n - 2.0 + k)), 0.5 * k - 1.0}};
}

AlphaResult alpha_coefficients(const SolutionSource& u, const CrackGeometry& geom, const Potential& f,
                               const SpectralBasis& basis, int k0, const std::vector<double>& radii,
                               const AlphaOptions& opts) {
  if (basis.dimension != 2) throw InvalidArgument("alpha_coefficients: N = 2 basis required");
  if (radii.empty()) throw InvalidArgument("alpha_coefficients: empty radius list");
  const auto space = basis.eigenspace(k0);
  if (space.empty()) throw InvalidArgument("alpha_coefficients: basis does not cover k0");
  const bool trivial = geom.is_identity() && f.is_zero();
  const AngularRule ang = angular_rule(opts.upsilon.angular_points);
  const int panels = opts.upsilon.radial_panels;
  const int points = opts.upsilon.radial_points;

  AlphaResult res;
  res.k0 = k0;
  res.radii = radii;
  for (const SpectralEntry* e : space) {
    const CircleMode& Y = circle_of(*e);
    std::vector<double> vals;
    std::vector<double> ups;
    for (double r : radii) {
      if (!(r > 0.0) || r >= u.radius()) throw InvalidArgument("alpha_coefficients: r outside (0, R)");
      const double phi = fourier_phi(u, r, basis, k0)[static_cast<std::size_t>(e->index - 1)];
      double a = std::pow(r, -0.5 * k0) * phi;
      double ups_r = 0.0;
      if (!trivial) {
        require_resolved(u, r, 4, true);
        ups_r = upsilon(u, geom, f, *e, r, opts.upsilon);
        for (const PowerTerm& w : alpha_weight(2, k0, r, opts.form)) {
          double integral = 0.0;
          if (opts.nested) {
            integral = quad::graded_to_zero(
                [&](double s) { return std::pow(s, w.power) * upsilon(u, geom, f, *e, s, opts.upsilon); }, r,
                panels, points);
          } else {
            // int_0^r s^p int_0^s rho = int_0^r rho(t) int_t^r s^p ds dt
            integral = quad::graded_to_zero(
                [&](double t) { return rho(u, geom, f, Y, ang, t) * tail_power(w.power, t, r); }, r, panels, points);
            if (!geom.is_identity())
              integral += quad::graded_to_zero(
                  [&](double s) { return std::pow(s, w.power) * boundary_term(u, geom, Y, ang, s); }, r, panels,
                  points);
          }
          a += w.coeff * integral;
        }
      }
      vals.push_back(a);
      ups.push_back(ups_r);
    }
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    res.values.push_back(vals);
    res.upsilon.push_back(ups);
    res.alpha.push_back(mean);
    res.spread.push_back(*hi - *lo);
  }
  if (opts.spread_tolerance > 0.0) {
    double scale = 0.0;
    for (double a : res.alpha) scale = std::max(scale, std::abs(a));
    for (double s : res.spread)
      if (s > opts.spread_tolerance * scale)
        throw SpreadTooLarge("alpha_coefficients: alpha varies with r by more than the tolerance");
  }
  return res;
}

BlowupLimit::BlowupLimit(const SpectralBasis& basis, int k0, std::vector<double> alpha)
    : k0_(k0), alpha_(std::move(alpha)) {
  const auto space = basis.eigenspace(k0);
  if (space.size() != alpha_.size()) throw InvalidArgument("BlowupLimit: alpha size differs from multiplicity");
  for (const SpectralEntry* e : space) modes_.push_back(circle_of(*e));
}

double BlowupLimit::value(const Eigen::Vector2d& p, Side side) const {
  const double s = p.norm();
  const double th = s == 0.0 ? 0.0 : branch_angle(p, side);
  double y = 0.0;
  for (std::size_t i = 0; i < modes_.size(); ++i) y += alpha_[i] * modes_[i].value(th);
  return k0_ == 0 ? y : std::pow(s, 0.5 * k0_) * y;
}

Eigen::Vector2d BlowupLimit::gradient(const Eigen::Vector2d& p, Side side) const {
  const double s = p.norm();
  if (s == 0.0) {
    if (k0_ % 2 == 1) throw GradientSingular("BlowupLimit: gradient singular at the tip");
    if (k0_ != 2) return Eigen::Vector2d::Zero();
  }
  const double th = s == 0.0 ? 0.0 : branch_angle(p, side);
  double y = 0.0;
  double dy = 0.0;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    y += alpha_[i] * modes_[i].value(th);
    dy += alpha_[i] * modes_[i].derivative(th);
  }
  const Eigen::Vector2d er(std::cos(th), std::sin(th));
  const Eigen::Vector2d et(-std::sin(th), std::cos(th));
  const double sp = k0_ == 2 ? 1.0 : std::pow(s, 0.5 * k0_ - 1.0);
  return sp * (0.5 * k0_ * y * er + dy * et);
}

BlowupReport verify_blowup(const SolutionSource& u, const SpectralBasis& basis, const AlphaResult& alpha,
                           const std::vector<double>& lambdas, const BlowupOptions& opts) {
  if (lambdas.size() < 6) throw InvalidArgument("verify_blowup: need at least 6 lambda values");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || lambdas[i] >= u.radius())
      throw InvalidArgument("verify_blowup: lambda outside (0, R)");
    if (i > 0 && !(lambdas[i] < lambdas[i - 1])) throw InvalidArgument("verify_blowup: lambdas must decrease");
  }
  const int k0 = alpha.k0;
  const BlowupLimit phi(basis, k0, alpha.alpha);
  const AngularRule ang = angular_rule(opts.angular_points);
  const quad::Graded rad = quad::graded_nodes(1.0, opts.radial_panels, opts.radial_points);

  BlowupReport rep;
  rep.k0 = k0;
  rep.lambdas = lambdas;
  rep.alpha = alpha.alpha;
  rep.alpha_spread = alpha.spread;
  rep.upsilon_radii = alpha.radii;
  rep.upsilon = alpha.upsilon;
  const int n = static_cast<int>(lambdas.size());
  rep.value_errors.assign(n, 0.0);
  rep.gradient_errors.assign(n, 0.0);
  rep.phi.assign(n, {});
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < n; ++j) {
    const double lam = lambdas[j];
    const double vs = std::pow(lam, -0.5 * k0);
    const double gs = lam * vs;
    double ev = 0.0;
    double eg = 0.0;
    for (std::size_t a = 0; a < rad.nodes.size(); ++a) {
      const double s = rad.nodes[a];
      for (std::size_t q = 0; q < ang.theta.size(); ++q) {
        const Eigen::Vector2d y(s * std::cos(ang.theta[q]), s * std::sin(ang.theta[q]));
        const double w = rad.weights[a] * ang.weight[q] * s;
        const double dv = vs * u.value(lam * y, Side::upper) - phi.value(y, Side::upper);
        const Eigen::Vector2d dg = gs * u.gradient(lam * y, Side::upper) - phi.gradient(y, Side::upper);
        ev += w * dv * dv;
        eg += w * dg.squaredNorm();
      }
    }
    rep.value_errors[j] = std::sqrt(ev);
    rep.gradient_errors[j] = std::sqrt(eg);
    rep.phi[j] = fourier_phi(u, lam, basis, k0);
  }
  rep.value_slope = fit_slope(lambdas, rep.value_errors, opts.floor);
  rep.gradient_slope = fit_slope(lambdas, rep.gradient_errors, opts.floor);
  rep.value_decreasing = decreasing(rep.value_errors, opts.slack, opts.floor);
  rep.gradient_decreasing = decreasing(rep.gradient_errors, opts.slack, opts.floor);
  rep.final_below_threshold = rep.value_errors.back() <= opts.final_threshold;
  if (opts.strict && !(rep.value_decreasing && rep.gradient_decreasing))
    throw NonDecreasingError("verify_blowup: rescaled errors do not decrease along the schedule");
  return rep;
}

std::vector<double> lambda_schedule(double first, double ratio, int count) {
  if (!(first > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 1)
    throw InvalidArgument("lambda_schedule: need first > 0, ratio in (0, 1), count >= 1");
  std::vector<double> out;
  double v = first;
  for (int i = 0; i < count; ++i, v *= ratio) out.push_back(v);
  return out;
}

std::string blowup_to_csv(const BlowupReport& report) {
  std::ostringstream out;
  out << "lambda,value_error,gradient_error\n";
  for (std::size_t i = 0; i < report.lambdas.size(); ++i)
    out << fmt(report.lambdas[i]) << ',' << fmt(report.value_errors[i]) << ',' << fmt(report.gradient_errors[i])
        << '\n';
  return out.str();
}

std::string blowup_summary_json(const BlowupReport& report, double gamma) {
  nlohmann::ordered_json j;
  j["k0"] = report.k0;
  j["gamma"] = gamma;
  j["alpha"] = report.alpha;
  j["alpha_spread"] = report.alpha_spread;
  j["value_slope"] = report.value_slope;
  j["gradient_slope"] = report.gradient_slope;
  j["value_decreasing"] = report.value_decreasing;
  j["gradient_decreasing"] = report.gradient_decreasing;
  j["final_below_threshold"] = report.final_below_threshold;
  return j.dump(2);
}

}  // namespace crackfreq
