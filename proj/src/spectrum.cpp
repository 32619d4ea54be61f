#include "crackfreq/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "crackfreq/errors.hpp"

namespace crackfreq {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct SurfaceElement {
  Eigen::Matrix3d K;
  Eigen::Matrix3d M;
};

SurfaceElement surface_element(const SlitMesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const std::array<Eigen::Vector3d, 3> p{mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
  // e_i: edge opposite vertex i, oriented cyclically.
  const std::array<Eigen::Vector3d, 3> e{p[2] - p[1], p[0] - p[2], p[1] - p[0]};
  const double area = 0.5 * e[2].cross(-e[1]).norm();
  SurfaceElement out;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      out.K(i, j) = out.K(j, i) = e[i].dot(e[j]) / (4.0 * area);
      out.M(i, j) = out.M(j, i) = area / 12.0 * (i == j ? 2.0 : 1.0);
    }
  }
  return out;
}

}  // namespace

double mu_exact(int k, int N) {
  if (k < 0 || N < 2) throw InvalidArgument("mu_exact: need k >= 0 and N >= 2");
  return k * (k + 2.0 * N - 4.0) / 4.0;
}

double CircleMode::norm_factor() const { return k == 0 ? 1.0 / std::sqrt(2.0 * kPi) : 1.0 / std::sqrt(kPi); }

double CircleMode::value(double t) const { return norm_factor() * std::cos(0.5 * k * t); }

double CircleMode::derivative(double t) const { return -0.5 * k * norm_factor() * std::sin(0.5 * k * t); }

double Cluster::relative_error() const {
  return formula == 0.0 ? std::abs(mean) : std::abs(mean - formula) / formula;
}

std::vector<const SpectralEntry*> SpectralBasis::eigenspace(int k) const {
  std::vector<const SpectralEntry*> out;
  for (const auto& e : entries)
    if (e.k == k) out.push_back(&e);
  return out;
}

SpectralBasis basis_circle(int k_max) {
  if (k_max < 0) throw InvalidArgument("basis_circle: k_max must be >= 0");
  SpectralBasis b;
  b.dimension = 2;
  for (int k = 0; k <= k_max; ++k) {
    SpectralEntry e;
    e.k = k;
    e.index = 1;
    e.mu = mu_exact(k, 2);
    e.circle = CircleMode{k};
    b.entries.push_back(e);
    b.clusters.push_back({k, e.mu, e.mu, 1});
  }
  return b;
}

SurfaceSystem assemble_surface(const SlitMesh& mesh, Execution exec) {
  if (mesh.kind != SlitMesh::Kind::sphere) throw InvalidArgument("assemble_surface: sphere mesh required");
  const int nt = static_cast<int>(mesh.triangles.size());
  std::vector<SurfaceElement> elems(nt);
  const bool parallel = exec == Execution::parallel;
#pragma omp parallel for schedule(static) if (parallel)
  for (int t = 0; t < nt; ++t) elems[t] = surface_element(mesh, t);

  std::vector<Eigen::Triplet<double>> kt;
  std::vector<Eigen::Triplet<double>> mt;
  kt.reserve(9 * nt);
  mt.reserve(9 * nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        kt.emplace_back(tri[i], tri[j], elems[t].K(i, j));
        mt.emplace_back(tri[i], tri[j], elems[t].M(i, j));
      }
    }
  }
  const int n = static_cast<int>(mesh.vertices.size());
  SurfaceSystem out{Eigen::SparseMatrix<double>(n, n), Eigen::SparseMatrix<double>(n, n)};
  out.stiffness.setFromTriplets(kt.begin(), kt.end());
  out.mass.setFromTriplets(mt.begin(), mt.end());
  return out;
}

std::vector<Cluster> cluster_eigenvalues(const std::vector<double>& values, int N, std::vector<int>* assignment) {
  std::vector<Cluster> clusters;
  if (assignment) assignment->assign(values.size(), -1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    int best = 0;
    for (int k = 1; mu_exact(k - 1, N) <= v + 1.0; ++k)
      if (std::abs(mu_exact(k, N) - v) < std::abs(mu_exact(best, N) - v)) best = k;
    const double gap = mu_exact(best + 1, N) - mu_exact(best, N);
    if (std::abs(v - mu_exact(best, N)) > 0.1 * gap) continue;
    if (assignment) (*assignment)[i] = best;
    auto it = std::find_if(clusters.begin(), clusters.end(), [&](const Cluster& c) { return c.k == best; });
    if (it == clusters.end()) {
      clusters.push_back({best, mu_exact(best, N), 0.0, 0});
      it = clusters.end() - 1;
    }
    it->mean = (it->mean * it->size + v) / (it->size + 1);
    ++it->size;
  }
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) { return a.k < b.k; });
  return clusters;
}

SpectralBasis eigensolve_slit_sphere(std::shared_ptr<const SlitMesh> mesh, int count, const EigenOptions& opts) {
  if (!mesh || mesh->kind != SlitMesh::Kind::sphere)
    throw InvalidArgument("eigensolve_slit_sphere: slit sphere mesh required");
  if (count < 1 || count > 12) throw InvalidArgument("eigensolve_slit_sphere: count must be in [1, 12]");
  const SurfaceSystem sys = assemble_surface(*mesh, opts.exec);
  const auto& K = sys.stiffness;
  const auto& M = sys.mass;
  const int n = static_cast<int>(K.rows());
  const int p = std::min(n, count + opts.extra_vectors);

  // Shift by -1: K + M is positive definite and its inverse maps the lowest
  // eigenvalues of the pencil to the largest.
  const Eigen::SparseMatrix<double> shifted = K + M;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) throw SolverFail("eigensolve_slit_sphere: factorization failed");

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::MatrixXd X(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = uni(rng);

  Eigen::VectorXd theta;
  std::vector<double> residuals(count, 0.0);
  bool converged = false;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Eigen::MatrixXd Y = ldlt.solve(M * X);
    const Eigen::MatrixXd KY = K * Y;
    const Eigen::MatrixXd MY = M * Y;
    Eigen::MatrixXd Kr = Y.transpose() * KY;
    Eigen::MatrixXd Mr = Y.transpose() * MY;
    Kr = 0.5 * (Kr + Kr.transpose()).eval();
    Mr = 0.5 * (Mr + Mr.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Kr, Mr);
    if (ges.info() != Eigen::Success) throw SolverFail("eigensolve_slit_sphere: Rayleigh-Ritz step failed");
    X = Y * ges.eigenvectors();
    theta = ges.eigenvalues();

    const Eigen::MatrixXd KX = K * X.leftCols(count);
    const Eigen::MatrixXd MX = M * X.leftCols(count);
    double worst = 0.0;
    for (int j = 0; j < count; ++j) {
      const double mx = MX.col(j).norm();
      residuals[j] = (KX.col(j) - theta[j] * MX.col(j)).norm() / (mx * (1.0 + std::abs(theta[j])));
      worst = std::max(worst, residuals[j]);
    }
    if (worst <= opts.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) throw SolverFail("eigensolve_slit_sphere: residual tolerance not reached");

  SpectralBasis b;
  b.dimension = 3;
  b.mesh = mesh;
  std::vector<double> values;
  for (int j = 0; j < count; ++j) {
    Eigen::VectorXd v = X.col(j);
    v /= std::sqrt(v.dot(M * v));
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;
    SpectralEntry e;
    e.mu = v.dot(K * v) / v.dot(M * v);
    e.nodal = std::move(v);
    e.residual = residuals[j];
    values.push_back(e.mu);
    b.entries.push_back(std::move(e));
  }
  std::vector<int> assignment;
  b.clusters = cluster_eigenvalues(values, 3, &assignment);
  std::vector<int> seen(64, 0);
  for (std::size_t j = 0; j < b.entries.size(); ++j) {
    b.entries[j].k = assignment[j];
    if (assignment[j] >= 0 && assignment[j] < 64) b.entries[j].index = ++seen[assignment[j]];
  }
  return b;
}

SideTraceNorms side_trace_norms(const SpectralBasis& basis, const SpectralEntry& entry) {
  if (entry.circle) {
    // The cut on the circle is the single point t = 0 / 2 pi.
    return {std::abs(entry.circle->value(0.0)), std::abs(entry.circle->value(2.0 * kPi))};
  }
  if (!basis.mesh) throw InvalidArgument("side_trace_norms: basis has no mesh");
  const SlitMesh& mesh = *basis.mesh;
  const Eigen::VectorXd& y = entry.nodal;
  auto norm_along = [&](bool upper) {
    std::vector<int> ids(mesh.tip_vertex_ids.begin(), mesh.tip_vertex_ids.end());
    for (const auto& [u, l] : mesh.crack_pairs) ids.push_back(upper ? u : l);
    std::sort(ids.begin(), ids.end(), [&](int a, int b) { return mesh.vertices[a].x() > mesh.vertices[b].x(); });
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
      const double len = (mesh.vertices[ids[i + 1]] - mesh.vertices[ids[i]]).norm();
      const double a = y[ids[i]];
      const double b = y[ids[i + 1]];
      sum += len * (a * a + a * b + b * b) / 3.0;
    }
    return std::sqrt(sum);
  };
  return {norm_along(true), norm_along(false)};
}

double trace_nonvanishing_check(const SpectralBasis& basis, const SpectralEntry& entry) {
  const auto n = side_trace_norms(basis, entry);
  return std::min(n.upper, n.lower);
}

double homogeneity_residual(const SpectralBasis& basis, const SpectralEntry& entry, int k) {
  const double mu = mu_exact(k, basis.dimension);
  if (entry.circle) {
    // Closed form: -Y'' = (k/2)^2 Y exactly, so only the formula mismatch remains.
    return std::abs(mu_exact(entry.circle->k, 2) - mu);
  }
  const SurfaceSystem sys = assemble_surface(*basis.mesh, Execution::serial);
  const Eigen::VectorXd& y = entry.nodal;
  const Eigen::VectorXd r = sys.stiffness * y - mu * (sys.mass * y);
  const Eigen::VectorXd lumped = sys.mass * Eigen::VectorXd::Ones(y.size());
  const double ny = std::sqrt(y.dot(sys.mass * y));
  return std::sqrt(r.cwiseProduct(lumped.cwiseInverse()).dot(r)) / ny;
}

std::string spectrum_to_csv(const SpectralBasis& basis) {
  std::ostringstream out;
  out << "index,k,mu,formula,residual\n";
  for (std::size_t i = 0; i < basis.entries.size(); ++i) {
    const auto& e = basis.entries[i];
    out << i << ',' << e.k << ',' << fmt(e.mu) << ','
        << (e.k >= 0 ? fmt(mu_exact(e.k, basis.dimension)) : std::string("nan")) << ',' << fmt(e.residual)
        << '\n';
  }
  return out.str();
}

std::string clusters_to_csv(const SpectralBasis& basis) {
  std::ostringstream out;
  out << "k,formula,mean,size,relative_error\n";
  for (const auto& c : basis.clusters)
    out << c.k << ',' << fmt(c.formula) << ',' << fmt(c.mean) << ',' << c.size << ',' << fmt(c.relative_error())
        << '\n';
  return out.str();
}

}  // namespace crackfreq
