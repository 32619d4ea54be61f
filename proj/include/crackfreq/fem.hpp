#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "crackfreq/geometry.hpp"
#include "crackfreq/slitmesh.hpp"

namespace crackfreq {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Nodal values of a P1 function over a slit mesh. Both copies of a slit
/// vertex carry their own value, so the field may jump across the slit.
class Field {
 public:
  Field(std::shared_ptr<const SlitMesh> mesh, Eigen::VectorXd values);

  const SlitMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const SlitMesh>& mesh_ptr() const { return mesh_; }
  const Eigen::VectorXd& values() const { return values_; }

 private:
  std::shared_ptr<const SlitMesh> mesh_;
  Eigen::VectorXd values_;
};

/// Side to use when evaluating a reference function at vertex v (lower for
/// the lower copy of a slit vertex, upper otherwise).
std::vector<Side> vertex_sides(const SlitMesh& mesh);

using PointFunction = std::function<double(const Eigen::Vector2d&, Side)>;

/// Nodal interpolant of `fn`, side-aware on the slit.
Field interpolate(std::shared_ptr<const SlitMesh> mesh, const PointFunction& fn);

/// The potential f of the equation. Radial powers c |x|^{-2+2 eps} model the
/// second (singular) hypothesis class; constants and sampled functions the
/// first.
class Potential {
 public:
  enum class Kind { constant, radial_power, sampled };
  enum class Hypothesis { H1, H2 };
  using Sampler = std::function<double(const Eigen::VectorXd&)>;

  static Potential zero();
  static Potential constant(double c);
  static Potential radial_power(double c, double epsilon);
  static Potential sampled(Sampler fn, Hypothesis hypothesis, double epsilon = 1.0);

  Kind kind() const { return kind_; }
  Hypothesis hypothesis() const { return hypothesis_; }
  double coefficient() const { return c_; }
  /// Exponent -2 + 2 eps of the radial power (0 otherwise).
  double exponent() const { return exponent_; }
  double epsilon() const { return epsilon_; }
  bool is_zero() const { return kind_ == Kind::constant && c_ == 0.0; }

  double operator()(const Eigen::VectorXd& x) const;

 private:
  Kind kind_ = Kind::constant;
  Hypothesis hypothesis_ = Hypothesis::H1;
  double c_ = 0.0;
  double exponent_ = 0.0;
  double epsilon_ = 1.0;
  Sampler fn_;
};

/// f~(y) = |det J_F(y)| f(F(y)).
double pulled_back(const Potential& f, const CrackGeometry& geom, const Eigen::Vector2d& y);

struct AssemblyOptions {
  /// Subdivide tip triangles and use a degree-5 rule there; required for
  /// radial powers with exponent <= -1.5.
  bool tip_aware_quadrature = false;
  Execution exec = Execution::parallel;
};

/// Element matrices of one triangle, in local vertex order.
struct ElementMatrices {
  Eigen::Matrix3d stiffness;
  Eigen::Matrix3d mass_f;
};

std::vector<ElementMatrices> element_matrices(const SlitMesh& mesh, const CrackGeometry& geom,
                                              const Potential& f, const AssemblyOptions& opts = {});

struct Assembled {
  SparseMatrix stiffness;
  SparseMatrix mass_f;
};

/// Global P1 matrices. The slit contributes no boundary terms: its two faces
/// carry distinct vertex ids, so natural conditions hold on each.
Assembled assemble(const SlitMesh& mesh, const CrackGeometry& geom, const Potential& f,
                   const AssemblyOptions& opts = {});

struct SolveStats {
  std::string method;  // "ldlt" or "cg"
  int iterations = 0;
  double residual = 0.0;  // infinity norm on free DOFs
  double rhs_norm = 0.0;
  int free_dofs = 0;
};

struct Solution {
  Field field;
  SolveStats stats;
};

/// Solves (stiffness - mass_f) U = 0 on free vertices with U fixed on
/// `boundary_values`, which must cover every outer boundary vertex.
Solution solve_dirichlet(std::shared_ptr<const SlitMesh> mesh, const Assembled& system,
                         const std::map<int, double>& boundary_values);

/// Outer boundary data taken from `fn`.
std::map<int, double> boundary_data(const SlitMesh& mesh, const PointFunction& fn);

/// sqrt of the integral of (field - reference)^2 with the 3-point rule.
double l2_error(const Field& field, const PointFunction& reference);
double l2_norm(const Field& field);

/// Gradient of the field on each triangle.
std::vector<Eigen::Vector2d> triangle_gradients(const Field& field);
/// Area-weighted average of incident triangle gradients per vertex. Slit
/// copies only see triangles of their own face.
std::vector<Eigen::Vector2d> recover_gradients(const Field& field);

/// "id,value" table with 17 significant digits.
std::string field_to_csv(const Field& field);

}  // namespace crackfreq
