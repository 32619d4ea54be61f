#include "crackfreq/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "crackfreq/errors.hpp"
#include "crackfreq/quadrature.hpp"

namespace crackfreq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mu_at(const CrackGeometry& geom, const Eigen::Vector2d& y) {
  if (geom.is_identity()) return 1.0;
  return eval_mu_beta(geom, Eigen::VectorXd(y)).mu;
}

Eigen::Vector2d circle_point(double r, int j, int n) {
  if (j == 0 || j == n) return {r, 0.0};
  const double t = kTwoPi * j / n;
  return {r * std::cos(t), r * std::sin(t)};
}

struct TriangleSpan {
  double rmin;
  double rmax;
  double tmin;
  double tmax;
};

std::vector<TriangleSpan> triangle_spans(const SlitMesh& mesh) {
  const auto theta = vertex_angles(mesh);
  std::vector<TriangleSpan> out(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    TriangleSpan s{0.0, 0.0, kTwoPi, 0.0};
    bool tip = false;
    for (int v : tri) {
      s.rmax = std::max(s.rmax, mesh.vertices[v].head<2>().norm());
      if (v == mesh.tip_vertex_id()) {
        tip = true;
        continue;
      }
      s.tmin = std::min(s.tmin, theta[v]);
      s.tmax = std::max(s.tmax, theta[v]);
    }
    if (tip) {
      s.tmin = 0.0;
      s.tmax = kTwoPi;
    } else {
      s.rmin = s.rmax;
      for (int e = 0; e < 3; ++e) {
        const Eigen::Vector2d a = mesh.vertices[tri[e]].head<2>();
        const Eigen::Vector2d d = mesh.vertices[tri[(e + 1) % 3]].head<2>() - a;
        const double u = std::clamp(-a.dot(d) / d.squaredNorm(), 0.0, 1.0);
        s.rmin = std::min(s.rmin, (a + u * d).norm());
      }
    }
    out[t] = s;
  }
  return out;
}

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  if (pts.size() < 3) return pts;
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Integral of A grad U . grad U - f~ U^2 over the part of triangle t inside
// the disk of radius r, with the disk boundary replaced by a fine chord polygon.
double clipped_energy(const SlitMesh& mesh, int t, const TriangleSpan& span, const Eigen::VectorXd& u,
                      const CrackGeometry& geom, const Potential& f, double r, int arc_samples) {
  const auto& tri = mesh.triangles[t];
  const Eigen::Vector2d a = mesh.vertices[tri[0]].head<2>();
  const Eigen::Vector2d b = mesh.vertices[tri[1]].head<2>();
  const Eigen::Vector2d c = mesh.vertices[tri[2]].head<2>();
  const double det = (b - a).x() * (c - a).y() - (c - a).x() * (b - a).y();
  auto bary = [&](const Eigen::Vector2d& p) {
    const double l1 = ((p - a).x() * (c - a).y() - (c - a).x() * (p - a).y()) / det;
    const double l2 = ((b - a).x() * (p - a).y() - (p - a).x() * (b - a).y()) / det;
    return Eigen::Vector3d(1.0 - l1 - l2, l1, l2);
  };

  std::vector<Eigen::Vector2d> pts;
  const std::array<Eigen::Vector2d, 3> corner{a, b, c};
  for (int e = 0; e < 3; ++e) {
    const Eigen::Vector2d& p = corner[e];
    const Eigen::Vector2d& q = corner[(e + 1) % 3];
    if (p.norm() <= r) pts.push_back(p);
    const Eigen::Vector2d d = q - p;
    const double A2 = d.squaredNorm();
    const double B = p.dot(d);
    const double C = p.squaredNorm() - r * r;
    const double disc = B * B - A2 * C;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    for (double s : {(-B - sq) / A2, (-B + sq) / A2})
      if (s > 0.0 && s < 1.0) pts.push_back(p + s * d);
  }
  const int m0 = static_cast<int>(std::ceil(span.tmin / kTwoPi * arc_samples));
  const int m1 = static_cast<int>(std::floor(span.tmax / kTwoPi * arc_samples));
  for (int m = m0; m <= m1; ++m) {
    const Eigen::Vector2d p = circle_point(r, m, arc_samples);
    if (bary(p).minCoeff() >= -1e-13) pts.push_back(p);
  }
  const auto hull = convex_hull(std::move(pts));
  if (hull.size() < 3) return 0.0;

  const Eigen::Vector3d uv(u[tri[0]], u[tri[1]], u[tri[2]]);
  const Eigen::Vector2d grad =
      Eigen::Vector2d((uv[1] - uv[0]) * (c - a).y() - (uv[2] - uv[0]) * (b - a).y(),
                      (uv[2] - uv[0]) * (b - a).x() - (uv[1] - uv[0]) * (c - a).x()) /
      det;
  const auto& rule = quad::triangle_degree5();
  double sum = 0.0;
  for (std::size_t k = 1; k + 1 < hull.size(); ++k) {
    const Eigen::Vector2d& p0 = hull[0];
    const Eigen::Vector2d& p1 = hull[k];
    const Eigen::Vector2d& p2 = hull[k + 1];
    const double area = 0.5 * std::abs(cross(p0, p1, p2));
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& w = rule.bary[q];
      const Eigen::Vector2d y = w[0] * p0 + w[1] * p1 + w[2] * p2;
      const double uh = bary(y).dot(uv);
      double ag = grad.squaredNorm();
      if (!geom.is_identity()) ag = grad.dot(geom.coefficient(Eigen::VectorXd(y)).topLeftCorner<2, 2>() * grad);
      const double fu = f.is_zero() ? 0.0 : pulled_back(f, geom, y) * uh * uh;
      sum += rule.weights[q] * area * (ag - fu);
    }
  }
  return sum;
}

double solve3_constant(const std::array<double, 3>& x, const std::array<double, 3>& y) {
  // Constant term of the quadratic through (x_i, y_i).
  Eigen::Matrix3d V;
  Eigen::Vector3d rhs;
  for (int i = 0; i < 3; ++i) {
    V(i, 0) = 1.0;
    V(i, 1) = x[i];
    V(i, 2) = x[i] * x[i];
    rhs[i] = y[i];
  }
  return V.fullPivLu().solve(rhs)[0];
}

void require_positive_heights(const FrequencyTrace& trace) {
  if (trace.radii.empty()) throw InvalidArgument("trace has no samples");
  for (double h : trace.H)
    if (!(h > 0.0)) throw HeightNotPositive("H(r) is not positive; the field vanishes on a sampled circle");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class U>
FrequencyTrace closed_trace(const U& u, const std::vector<double>& radii, double domain_radius, double epsilon) {
  FrequencyTrace tr;
  tr.radii = radii;
  tr.domain_radius = domain_radius;
  tr.epsilon = epsilon;
  tr.delta = remainder_exponent(epsilon);
  for (double r : radii) {
    if (!(r > 0.0) || r > domain_radius) throw InvalidArgument("closed_form_trace: radius outside (0, R]");
    const HEN v = closed_form_HEN(u, r);
    tr.H.push_back(v.H);
    tr.E.push_back(v.E);
    tr.N.push_back(v.N);
  }
  return tr;
}

}  // namespace

double remainder_exponent(double epsilon, int dimension) {
  return 4.0 * epsilon / (dimension + 2.0 * epsilon);
}

double height(const SolutionSource& u, const CrackGeometry& geom, double r, int angles) {
  if (!(r > 0.0)) throw InvalidArgument("height: r must be positive");
  if (angles < 8) throw InvalidArgument("height: need at least 8 angles");
  const double dt = kTwoPi / angles;
  double sum = 0.0;
  for (int j = 0; j <= angles; ++j) {
    const Eigen::Vector2d p = circle_point(r, j, angles);
    const Side side = j == angles ? Side::lower : Side::upper;
    const double v = u.value(p, side);
    const double w = (j == 0 || j == angles) ? 0.5 * dt : dt;
    sum += w * mu_at(geom, p) * v * v;
  }
  return sum;
}

double boundary_flux_energy(const SolutionSource& u, double r, int angles) {
  const double dt = kTwoPi / angles;
  double sum = 0.0;
  for (int j = 0; j <= angles; ++j) {
    const Eigen::Vector2d p = circle_point(r, j, angles);
    const Side side = j == angles ? Side::lower : Side::upper;
    const double w = (j == 0 || j == angles) ? 0.5 * dt : dt;
    sum += w * r * u.value(p, side) * u.gradient(p, side).dot(p / r);
  }
  return sum;
}

FrequencyTrace compute_trace(const Field& field, const CrackGeometry& geom, const Potential& f,
                             const std::vector<double>& radii, const TraceOptions& opts) {
  const SlitMesh& mesh = field.mesh();
  if (radii.empty()) throw InvalidArgument("compute_trace: no radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || radii[i] >= mesh.radius)
      throw InvalidArgument("compute_trace: radii must lie strictly inside the mesh");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw InvalidArgument("compute_trace: radii must increase");
    if (mesh.layers_inside(radii[i]) < opts.min_layers)
      throw RadiusTooSmall("compute_trace: fewer than " + std::to_string(opts.min_layers) +
                           " mesh layers inside r = " + fmt(radii[i]));
  }

  const FieldSource source(field, FieldSource::GradientMode::triangle);
  const auto elems = element_matrices(mesh, geom, f, opts.assembly);
  const auto spans = triangle_spans(mesh);
  const Eigen::VectorXd& u = field.values();

  FrequencyTrace tr;
  tr.radii = radii;
  tr.domain_radius = mesh.radius;
  tr.epsilon = std::isnan(opts.epsilon) ? f.epsilon() : opts.epsilon;
  tr.delta = remainder_exponent(tr.epsilon);
  const int n = static_cast<int>(radii.size());
  tr.H.assign(n, 0.0);
  tr.E.assign(n, 0.0);
  tr.N.assign(n, kNaN);
  const bool parallel = opts.exec == Execution::parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < n; ++i) {
    const double r = radii[i];
    tr.H[i] = height(source, geom, r, opts.angles);
    double e = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      if (spans[t].rmin >= r) continue;
      if (spans[t].rmax <= r) {
        const auto& tri = mesh.triangles[t];
        const Eigen::Vector3d ut(u[tri[0]], u[tri[1]], u[tri[2]]);
        e += ut.dot((elems[t].stiffness - elems[t].mass_f) * ut);
      } else {
        e += clipped_energy(mesh, static_cast<int>(t), spans[t], u, geom, f, r, opts.arc_samples);
      }
    }
    tr.E[i] = e;
    if (tr.H[i] > 0.0) tr.N[i] = e / tr.H[i];
  }
  return tr;
}

FrequencyTrace closed_form_trace(const CrackHarmonic& u, const std::vector<double>& radii,
                                 double domain_radius, double epsilon) {
  return closed_trace(u, radii, domain_radius, epsilon);
}

FrequencyTrace closed_form_trace(const BesselMode& u, const std::vector<double>& radii,
                                 double domain_radius, double epsilon) {
  return closed_trace(u, radii, domain_radius, epsilon);
}

FrequencyTrace synthetic_trace(std::vector<double> radii, std::vector<double> N, double delta,
                               double domain_radius) {
  if (radii.size() != N.size()) throw InvalidArgument("synthetic_trace: size mismatch");
  FrequencyTrace tr;
  tr.H.assign(radii.size(), 1.0);
  tr.E = N;
  tr.radii = std::move(radii);
  tr.N = std::move(N);
  tr.delta = delta;
  tr.domain_radius = domain_radius;
  return tr;
}

double eta_gauge(const Potential& f, double r, double epsilon, int dimension) {
  if (!(r > 0.0)) throw InvalidArgument("eta_gauge: r must be positive");
  if (!(epsilon > 0.0)) throw InvalidArgument("eta_gauge: epsilon must be positive");
  if (dimension != 2) throw InvalidArgument("eta_gauge: only dimension 2 is supported");
  if (f.is_zero()) return 0.0;
  const double q = 0.5 * dimension + epsilon;
  if (f.kind() == Potential::Kind::radial_power && f.exponent() * q + dimension <= 0.0)
    throw InvalidArgument("eta_gauge: potential not in L^{N/2+eps}(B_r)");
  double integral = 0.0;
  if (f.kind() == Potential::Kind::sampled) {
    const auto& g = quad::gauss_legendre(32);
    integral = quad::graded_to_zero(
        [&](double s) {
          double ring = 0.0;
          for (int half = 0; half < 2; ++half) {
            for (std::size_t k = 0; k < g.nodes.size(); ++k) {
              const double t = std::numbers::pi * (half + 0.5 * (g.nodes[k] + 1.0));
              const Eigen::Vector2d y(s * std::cos(t), s * std::sin(t));
              ring += 0.5 * std::numbers::pi * g.weights[k] * std::pow(std::abs(f(y)), q);
            }
          }
          return ring * s;
        },
        r);
  } else {
    integral = quad::graded_to_zero(
        [&](double s) { return kTwoPi * s * std::pow(std::abs(f(Eigen::Vector2d(s, 0.0))), q); }, r);
  }
  return std::pow(integral, 1.0 / q) * std::pow(r, remainder_exponent(epsilon, dimension));
}

MonotonicityAudit audit_monotonicity(const FrequencyTrace& trace, double slack, double violation_slack) {
  require_positive_heights(trace);
  if (trace.radii.size() < 10) throw InvalidArgument("audit_monotonicity: need at least 10 radii");
  const auto& r = trace.radii;
  const auto& N = trace.N;
  const double d = trace.delta;
  MonotonicityAudit out;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double dr = std::pow(r[i + 1], d) - std::pow(r[i], d);
    out.fitted_C = std::max(out.fitted_C, (N[i] - N[i + 1] - slack) / dr);
  }
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double lo = N[i] + out.fitted_C * std::pow(r[i], d);
    const double hi = N[i + 1] + out.fitted_C * std::pow(r[i + 1], d);
    // The fitted C makes the binding pair hold with equality; allow for rounding.
    const double round = 1e-12 * (1.0 + std::abs(lo));
    if (hi < lo - violation_slack - round) out.violations.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));
  }
  return out;
}

GammaEstimate estimate_gamma(const FrequencyTrace& trace) {
  require_positive_heights(trace);
  if (trace.radii.size() < 3) throw InvalidArgument("estimate_gamma: need at least 3 radii");
  if (trace.radii.front() > trace.domain_radius / 20.0 * (1.0 + 1e-12))
    throw InvalidArgument("estimate_gamma: smallest radius must be <= R / 20");
  std::array<double, 3> x{};
  std::array<double, 3> y{};
  for (int i = 0; i < 3; ++i) {
    x[i] = std::pow(trace.radii[i], trace.delta);
    y[i] = trace.N[i];
  }
  GammaEstimate out;
  out.gamma = solve3_constant(x, y);
  out.k0 = static_cast<int>(std::lround(2.0 * out.gamma));
  if (std::abs(2.0 * out.gamma - out.k0) > 0.1)
    throw HalfIntegerMismatch("estimate_gamma: 2 gamma = " + fmt(2.0 * out.gamma) + " is not near an integer");
  return out;
}

HGrowth audit_H_growth(const FrequencyTrace& trace, double gamma) {
  require_positive_heights(trace);
  if (trace.radii.size() < 3) throw InvalidArgument("audit_H_growth: need at least 3 radii");
  HGrowth out;
  std::vector<double> q(trace.radii.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = trace.H[i] / std::pow(trace.radii[i], 2.0 * gamma);
    out.upper_alpha = std::max(out.upper_alpha, q[i]);
  }
  std::array<double, 3> x{};
  std::array<double, 3> y{};
  for (int i = 0; i < 3; ++i) {
    x[i] = std::pow(trace.radii[i], trace.delta);
    y[i] = q[i];
  }
  out.limit_estimate = solve3_constant(x, y);
  if (!(out.limit_estimate > 0.0))
    throw NonPositiveLimit("audit_H_growth: extrapolated H(r) / r^{2 gamma} is not positive");
  return out;
}

DoublingAudit audit_doubling(const FrequencyTrace& trace) {
  require_positive_heights(trace);
  DoublingAudit out;
  const auto& r = trace.radii;
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = i + 1; j < r.size() && r[j] <= 2.0 * r[i] * (1.0 + 1e-12); ++j) {
      const double ratio = trace.H[j] / trace.H[i];
      out.C1 = std::max({out.C1, ratio, 1.0 / ratio});
      if (std::abs(r[j] / r[i] - 2.0) < 1e-9) out.ratios_at_2.push_back(ratio);
    }
  }
  return out;
}

std::string trace_to_csv(const FrequencyTrace& trace, double gamma) {
  std::ostringstream out;
  out << "r,H,E,N,H_over_r2gamma\n";
  for (std::size_t i = 0; i < trace.radii.size(); ++i) {
    out << fmt(trace.radii[i]) << ',' << fmt(trace.H[i]) << ',' << fmt(trace.E[i]) << ','
        << fmt(trace.N[i]) << ',' << fmt(trace.H[i] / std::pow(trace.radii[i], 2.0 * gamma)) << '\n';
  }
  return out.str();
}

}  // namespace crackfreq
