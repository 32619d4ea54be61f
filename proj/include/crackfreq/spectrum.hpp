#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crackfreq/geometry.hpp"
#include "crackfreq/slitmesh.hpp"

namespace crackfreq {

/// mu_k = k (k + 2N - 4) / 4.
double mu_exact(int k, int N);

/// Closed-form eigenfunction on the slit circle, t in [0, 2 pi]:
/// cos(k t / 2) / sqrt(pi) for k >= 1 and 1 / sqrt(2 pi) for k = 0.
struct CircleMode {
  int k = 0;
  double value(double t) const;
  double derivative(double t) const;
  double norm_factor() const;
};

struct SpectralEntry {
  int k = -1;     // formula index; -1 when no formula value is close
  int index = 1;  // 1-based position within the k-eigenspace
  double mu = 0.0;
  std::optional<CircleMode> circle;  // dimension 2
  Eigen::VectorXd nodal;             // dimension 3, on the sphere mesh
  double residual = 0.0;             // eigen-equation residual of a computed pair
};

/// Eigenvalues grouped around one formula value.
struct Cluster {
  int k = 0;
  double formula = 0.0;
  double mean = 0.0;
  int size = 0;
  double relative_error() const;  // |mean - formula| / formula (absolute for k = 0)
};

struct SpectralBasis {
  int dimension = 2;
  std::vector<SpectralEntry> entries;  // ascending mu
  std::shared_ptr<const SlitMesh> mesh;  // sphere mesh for dimension 3
  std::vector<Cluster> clusters;

  /// Entries belonging to formula index k.
  std::vector<const SpectralEntry*> eigenspace(int k) const;
  int multiplicity(int k) const { return static_cast<int>(eigenspace(k).size()); }
};

/// k = 0..k_max closed-form basis for N = 2 (one function per k).
SpectralBasis basis_circle(int k_max);

struct SurfaceSystem {
  Eigen::SparseMatrix<double> stiffness;
  Eigen::SparseMatrix<double> mass;
};

/// P1 Laplace-Beltrami stiffness (cotangent form) and consistent mass on the
/// flat-triangle surface. The cut carries distinct ids per side, so natural
/// conditions hold on it.
SurfaceSystem assemble_surface(const SlitMesh& mesh, Execution exec = Execution::parallel);

struct EigenOptions {
  double tolerance = 1e-10;
  int max_iterations = 2000;
  std::uint64_t seed = 20240917;
  int extra_vectors = 10;
  Execution exec = Execution::parallel;
};

/// Lowest `count` eigenpairs of the surface pencil by shift-invert subspace
/// iteration with Rayleigh-Ritz. Throws SolverFail if the residuals do not
/// reach the tolerance.
SpectralBasis eigensolve_slit_sphere(std::shared_ptr<const SlitMesh> mesh, int count,
                                     const EigenOptions& opts = {});

/// Assigns each eigenvalue to the nearest formula value when within 10% of
/// the gap to the next one.
std::vector<Cluster> cluster_eigenvalues(const std::vector<double>& values, int N,
                                         std::vector<int>* assignment = nullptr);

struct SideTraceNorms {
  double upper = 0.0;
  double lower = 0.0;
};

/// L2 norms of the eigenfunction's traces on each face of the cut.
SideTraceNorms side_trace_norms(const SpectralBasis& basis, const SpectralEntry& entry);
/// min over faces of side_trace_norms.
double trace_nonvanishing_check(const SpectralBasis& basis, const SpectralEntry& entry);

/// || K y - mu_k(N) M y || in the lumped inverse-mass norm, for y normalized in
/// L2: the residual of the homogeneity equation with the formula eigenvalue.
double homogeneity_residual(const SpectralBasis& basis, const SpectralEntry& entry, int k);

/// "index,k,mu,formula,residual" table.
std::string spectrum_to_csv(const SpectralBasis& basis);
/// "cluster k,formula,mean,size,relative_error" table.
std::string clusters_to_csv(const SpectralBasis& basis);

}  // namespace crackfreq
