#include "crackfreq/fem.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "crackfreq/errors.hpp"
#include "crackfreq/quadrature.hpp"

namespace crackfreq {

namespace {

// Quadrature point in parent barycentric coordinates; weights sum to 1.
struct QPoint {
  std::array<double, 3> bary;
  double weight;
};

std::vector<QPoint> plain_rule(const quad::TriangleRule& rule) {
  std::vector<QPoint> out;
  for (std::size_t q = 0; q < rule.weights.size(); ++q) out.push_back({rule.bary[q], rule.weights[q]});
  return out;
}

std::vector<QPoint> subdivided_rule(const quad::TriangleRule& rule) {
  using B = std::array<double, 3>;
  const B e0{1, 0, 0}, e1{0, 1, 0}, e2{0, 0, 1};
  auto mid = [](const B& a, const B& b) { return B{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])}; };
  const B m01 = mid(e0, e1), m12 = mid(e1, e2), m02 = mid(e0, e2);
  const std::array<std::array<B, 3>, 4> children{{{e0, m01, m02}, {m01, e1, m12}, {m02, m12, e2}, {m01, m12, m02}}};
  std::vector<QPoint> out;
  for (const auto& child : children) {
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      B p{0, 0, 0};
      for (int k = 0; k < 3; ++k)
        for (int c = 0; c < 3; ++c) p[c] += rule.bary[q][k] * child[k][c];
      out.push_back({p, 0.25 * rule.weights[q]});
    }
  }
  return out;
}

bool touches_tip(const SlitMesh& mesh, const std::array<int, 3>& tri) {
  for (int v : tri)
    for (int tip : mesh.tip_vertex_ids)
      if (v == tip) return true;
  return false;
}

ElementMatrices element(const SlitMesh& mesh, int t, const CrackGeometry& geom, const Potential& f,
                        const std::vector<QPoint>& regular, const std::vector<QPoint>& tip_rule,
                        bool use_tip_rule) {
  const auto& tri = mesh.triangles[t];
  const Eigen::Vector2d p0 = mesh.vertices[tri[0]].head<2>();
  const Eigen::Vector2d p1 = mesh.vertices[tri[1]].head<2>();
  const Eigen::Vector2d p2 = mesh.vertices[tri[2]].head<2>();
  const Eigen::Vector2d d1 = p1 - p0;
  const Eigen::Vector2d d2 = p2 - p0;
  const double det = d1.x() * d2.y() - d2.x() * d1.y();
  const double area = 0.5 * det;
  Eigen::Matrix<double, 2, 3> G;
  G.col(1) = Eigen::Vector2d(d2.y(), -d2.x()) / det;
  G.col(2) = Eigen::Vector2d(-d1.y(), d1.x()) / det;
  G.col(0) = -G.col(1) - G.col(2);

  const std::vector<QPoint>& rule = use_tip_rule && touches_tip(mesh, tri) ? tip_rule : regular;
  auto point = [&](const std::array<double, 3>& b) { return Eigen::Vector2d(b[0] * p0 + b[1] * p1 + b[2] * p2); };

  Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
  if (!geom.is_identity()) {
    A.setZero();
    for (const auto& q : regular) A += q.weight * geom.coefficient(point(q.bary)).topLeftCorner<2, 2>();
  }

  ElementMatrices out;
  const Eigen::Matrix3d K = area * (G.transpose() * A * G);
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  if (!f.is_zero()) {
    for (const auto& q : rule) {
      const double w = q.weight * area * pulled_back(f, geom, point(q.bary));
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) M(i, j) += w * q.bary[i] * q.bary[j];
    }
  }
  // Mirror the upper triangle so that element matrices are exactly symmetric.
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      out.stiffness(i, j) = out.stiffness(j, i) = K(i, j);
      out.mass_f(i, j) = out.mass_f(j, i) = M(i, j);
    }
  }
  return out;
}

SparseMatrix to_sparse(const SlitMesh& mesh, const std::vector<ElementMatrices>& elems, bool mass) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * elems.size());
  for (std::size_t t = 0; t < elems.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Eigen::Matrix3d& m = mass ? elems[t].mass_f : elems[t].stiffness;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], m(i, j));
  }
  const int n = static_cast<int>(mesh.vertices.size());
  SparseMatrix out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

// Jacobi-preconditioned CG; throws IndefiniteSystem on non-positive curvature.
Eigen::VectorXd conjugate_gradient(const SparseMatrix& K, const Eigen::VectorXd& b, double rel_tol,
                                   int& iterations) {
  const Eigen::VectorXd dinv = K.diagonal().cwiseInverse();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = dinv.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const double target = rel_tol * b.norm();
  const int max_iter = 10 * static_cast<int>(b.size()) + 100;
  for (iterations = 0; iterations < max_iter && r.norm() > target; ++iterations) {
    const Eigen::VectorXd Kp = K * p;
    const double curv = p.dot(Kp);
    if (!(curv > 0.0)) throw IndefiniteSystem("solve_dirichlet: non-positive curvature in CG");
    const double a = rz / curv;
    x += a * p;
    r -= a * Kp;
    z = dinv.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (r.norm() > target) throw SolverFail("solve_dirichlet: CG did not converge");
  return x;
}

}  // namespace

Field::Field(std::shared_ptr<const SlitMesh> mesh, Eigen::VectorXd values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw InvalidArgument("Field: null mesh");
  if (static_cast<std::size_t>(values_.size()) != mesh_->vertices.size())
    throw InvalidArgument("Field: value count differs from vertex count");
  if (!values_.allFinite()) throw InvalidArgument("Field: non-finite value");
}

std::vector<Side> vertex_sides(const SlitMesh& mesh) {
  std::vector<Side> sides(mesh.vertices.size(), Side::upper);
  for (const auto& [u, l] : mesh.crack_pairs) sides[l] = Side::lower;
  return sides;
}

Field interpolate(std::shared_ptr<const SlitMesh> mesh, const PointFunction& fn) {
  const auto sides = vertex_sides(*mesh);
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->vertices.size()));
  for (std::size_t i = 0; i < mesh->vertices.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = fn(mesh->vertices[i].head<2>(), sides[i]);
  return Field(std::move(mesh), std::move(v));
}

Potential Potential::zero() { return constant(0.0); }

Potential Potential::constant(double c) {
  if (!std::isfinite(c)) throw InvalidArgument("Potential: non-finite constant");
  Potential p;
  p.kind_ = Kind::constant;
  p.c_ = c;
  return p;
}

Potential Potential::radial_power(double c, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(c))
    throw InvalidArgument("Potential: radial power needs epsilon > 0 (exponent > -2)");
  Potential p;
  p.kind_ = Kind::radial_power;
  p.hypothesis_ = Hypothesis::H2;
  p.c_ = c;
  p.epsilon_ = epsilon;
  p.exponent_ = -2.0 + 2.0 * epsilon;
  return p;
}

Potential Potential::sampled(Sampler fn, Hypothesis hypothesis, double epsilon) {
  if (!fn) throw InvalidArgument("Potential: empty sampler");
  Potential p;
  p.kind_ = Kind::sampled;
  p.hypothesis_ = hypothesis;
  p.c_ = 1.0;
  p.epsilon_ = epsilon;
  p.fn_ = std::move(fn);
  return p;
}

double Potential::operator()(const Eigen::VectorXd& x) const {
  switch (kind_) {
    case Kind::constant:
      return c_;
    case Kind::radial_power:
      return c_ * std::pow(x.norm(), exponent_);
    case Kind::sampled:
      return fn_(x);
  }
  return 0.0;
}

double pulled_back(const Potential& f, const CrackGeometry& geom, const Eigen::Vector2d& y) {
  if (geom.is_identity()) return f(y);
  const Eigen::VectorXd yy = y;
  return std::abs(geom.det_jacobian(yy)) * f(geom.map(yy));
}

std::vector<ElementMatrices> element_matrices(const SlitMesh& mesh, const CrackGeometry& geom,
                                              const Potential& f, const AssemblyOptions& opts) {
  if (mesh.kind != SlitMesh::Kind::disk) throw InvalidArgument("assemble: slit disk mesh required");
  if (geom.dimension() != 2) throw InvalidArgument("assemble: volume problems are two-dimensional");
  if (geom.r1() < mesh.radius * (1.0 - 1e-12))
    throw InvalidArgument("assemble: geometry ball smaller than the mesh");
  if (f.kind() == Potential::Kind::radial_power && f.exponent() <= -1.5 && !opts.tip_aware_quadrature)
    throw UnsupportedQuadrature("assemble: radial power exponent <= -1.5 needs tip-aware quadrature");

  const bool tip_rule = opts.tip_aware_quadrature && f.kind() == Potential::Kind::radial_power;
  const std::vector<QPoint> regular = plain_rule(quad::triangle_degree2());
  const std::vector<QPoint> tip = subdivided_rule(quad::triangle_degree5());
  std::vector<ElementMatrices> out(mesh.triangles.size());
  const int n = static_cast<int>(mesh.triangles.size());
  const bool parallel = opts.exec == Execution::parallel;
#pragma omp parallel for schedule(static) if (parallel)
  for (int t = 0; t < n; ++t) out[t] = element(mesh, t, geom, f, regular, tip, tip_rule);
  return out;
}

Assembled assemble(const SlitMesh& mesh, const CrackGeometry& geom, const Potential& f,
                   const AssemblyOptions& opts) {
  const auto elems = element_matrices(mesh, geom, f, opts);
  return {to_sparse(mesh, elems, false), to_sparse(mesh, elems, true)};
}

std::map<int, double> boundary_data(const SlitMesh& mesh, const PointFunction& fn) {
  const auto sides = vertex_sides(mesh);
  std::map<int, double> out;
  for (int id : mesh.outer_boundary_ids) out[id] = fn(mesh.vertices[id].head<2>(), sides[id]);
  return out;
}

Solution solve_dirichlet(std::shared_ptr<const SlitMesh> mesh, const Assembled& system,
                         const std::map<int, double>& boundary_values) {
  const int n = static_cast<int>(mesh->vertices.size());
  if (system.stiffness.rows() != n || system.mass_f.rows() != n)
    throw InvalidArgument("solve_dirichlet: matrix size differs from mesh");
  for (int id : mesh->outer_boundary_ids)
    if (!boundary_values.count(id)) throw InvalidArgument("solve_dirichlet: missing boundary value");

  std::vector<int> free_index(n, -1);
  Eigen::VectorXd fixed = Eigen::VectorXd::Zero(n);
  std::vector<bool> is_fixed(n, false);
  for (const auto& [id, val] : boundary_values) {
    if (id < 0 || id >= n) throw InvalidArgument("solve_dirichlet: boundary id out of range");
    if (!std::isfinite(val)) throw InvalidArgument("solve_dirichlet: non-finite boundary value");
    is_fixed[id] = true;
    fixed[id] = val;
  }
  int nf = 0;
  for (int i = 0; i < n; ++i)
    if (!is_fixed[i]) free_index[i] = nf++;

  const SparseMatrix K = system.stiffness - system.mass_f;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
  for (int col = 0; col < K.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
      const int fr = free_index[it.row()];
      if (fr < 0) continue;
      const int fc = free_index[col];
      if (fc >= 0) trip.emplace_back(fr, fc, it.value());
      else rhs[fr] -= it.value() * fixed[col];
    }
  }
  SparseMatrix Kff(nf, nf);
  Kff.setFromTriplets(trip.begin(), trip.end());

  SolveStats stats;
  stats.free_dofs = nf;
  stats.rhs_norm = rhs.lpNorm<Eigen::Infinity>();
  Eigen::VectorXd u;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(Kff);
  if (ldlt.info() == Eigen::Success) {
    if ((ldlt.vectorD().array() <= 0.0).any())
      throw IndefiniteSystem("solve_dirichlet: system is not positive definite (potential too large)");
    stats.method = "ldlt";
    u = ldlt.solve(rhs);
    // One step of iterative refinement keeps the residual at round-off level.
    const Eigen::VectorXd res = rhs - Kff * u;
    u += ldlt.solve(res);
    stats.iterations = 1;
  } else {
    stats.method = "cg";
    u = conjugate_gradient(Kff, rhs, 1e-12, stats.iterations);
  }
  stats.residual = (Kff * u - rhs).lpNorm<Eigen::Infinity>();
  if (stats.residual > 1e-10 * std::max(stats.rhs_norm, 1e-300) && stats.residual > 1e-14)
    throw SolverFail("solve_dirichlet: residual above tolerance");

  Eigen::VectorXd values = fixed;
  for (int i = 0; i < n; ++i)
    if (free_index[i] >= 0) values[i] = u[free_index[i]];
  return {Field(std::move(mesh), std::move(values)), stats};
}

double l2_error(const Field& field, const PointFunction& reference) {
  const SlitMesh& mesh = field.mesh();
  const auto& rule = quad::triangle_degree2();
  const auto& v = field.values();
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = triangle_area(mesh, static_cast<int>(t));
    const Side side = triangle_side(mesh, static_cast<int>(t));
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& b = rule.bary[q];
      const Eigen::Vector2d p =
          b[0] * mesh.vertices[tri[0]].head<2>() + b[1] * mesh.vertices[tri[1]].head<2>() +
          b[2] * mesh.vertices[tri[2]].head<2>();
      const double uh = b[0] * v[tri[0]] + b[1] * v[tri[1]] + b[2] * v[tri[2]];
      const double d = uh - (reference ? reference(p, side) : 0.0);
      sum += rule.weights[q] * area * d * d;
    }
  }
  return std::sqrt(sum);
}

double l2_norm(const Field& field) { return l2_error(field, nullptr); }

std::vector<Eigen::Vector2d> triangle_gradients(const Field& field) {
  const SlitMesh& mesh = field.mesh();
  const auto& v = field.values();
  std::vector<Eigen::Vector2d> out(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Eigen::Vector2d p0 = mesh.vertices[tri[0]].head<2>();
    const Eigen::Vector2d d1 = mesh.vertices[tri[1]].head<2>() - p0;
    const Eigen::Vector2d d2 = mesh.vertices[tri[2]].head<2>() - p0;
    const double det = d1.x() * d2.y() - d2.x() * d1.y();
    const double a = v[tri[1]] - v[tri[0]];
    const double b = v[tri[2]] - v[tri[0]];
    out[t] = Eigen::Vector2d(a * d2.y() - b * d1.y(), b * d1.x() - a * d2.x()) / det;
  }
  return out;
}

std::vector<Eigen::Vector2d> recover_gradients(const Field& field) {
  const SlitMesh& mesh = field.mesh();
  const auto grads = triangle_gradients(field);
  std::vector<Eigen::Vector2d> sum(mesh.vertices.size(), Eigen::Vector2d::Zero());
  std::vector<double> weight(mesh.vertices.size(), 0.0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const double area = triangle_area(mesh, static_cast<int>(t));
    for (int v : mesh.triangles[t]) {
      sum[v] += area * grads[t];
      weight[v] += area;
    }
  }
  for (std::size_t i = 0; i < sum.size(); ++i)
    if (weight[i] > 0.0) sum[i] /= weight[i];
  return sum;
}

std::string field_to_csv(const Field& field) {
  std::ostringstream out;
  out << "vertex_id,value\n";
  char buf[48];
  for (Eigen::Index i = 0; i < field.values().size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", field.values()[i]);
    out << i << ',' << buf << '\n';
  }
  return out.str();
}

}  // namespace crackfreq
