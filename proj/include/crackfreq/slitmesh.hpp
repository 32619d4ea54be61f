#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace crackfreq {

/// Which face of the slit a point on it belongs to. Angles follow one branch
/// convention everywhere: theta in [0, 2 pi], theta = 0 is the upper face
/// (approached from y > 0), theta = 2 pi the lower face.
enum class Side { upper, lower };

/// Triangulation of the disk B_R with a slit along the positive x axis, or of
/// the unit sphere with a cut along the half great circle {x3 = 0, x2 >= 0}.
///
/// Vertices on the slit are duplicated: one id per face, identical
/// coordinates, listed in `crack_pairs` as (upper, lower). Tips (the disk
/// origin, the two cut end points on the sphere) carry a single id. Both mesh
/// kinds are built from concentric rings around the tip so that element size
/// can be graded geometrically toward it.
struct SlitMesh {
  enum class Kind { disk, sphere };

  Kind kind = Kind::disk;
  std::vector<Eigen::Vector3d> vertices;  // z = 0 for disks
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::pair<int, int>> crack_pairs;
  std::vector<int> tip_vertex_ids;        // disk: one; sphere: two
  std::vector<int> outer_boundary_ids;    // empty for the sphere
  double radius = 1.0;                    // disk radius (1 for the sphere)
  double grading_ratio = 0.5;
  int levels = 0;
  /// Ring radii in increasing order (colatitude from the first tip on the
  /// sphere). Used to count graded layers inside a ball.
  std::vector<double> layer_radii;

  int tip_vertex_id() const { return tip_vertex_ids.front(); }
  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }

  /// Number of rings with radius strictly below r.
  int layers_inside(double r) const;
};

/// Geometric facts computed from a mesh, used to check its invariants.
struct MeshReport {
  int vertex_count = 0;
  int edge_count = 0;
  int triangle_count = 0;
  int euler_characteristic = 0;
  double min_angle_deg = 0.0;
  double max_angle_deg = 0.0;
  double area = 0.0;
  double max_diameter = 0.0;
  double tip_diameter = 0.0;  // longest edge of triangles touching a tip
  bool positively_oriented = true;
  bool interior_edges_manifold = true;  // every interior edge has two triangles
  bool slit_edges_single_sided = true;  // each slit edge sits in one triangle, on its own face
  bool sides_separated = true;          // no triangle mixes upper and lower slit vertices
  bool pairs_coincide = true;           // crack pair coordinates identical
  bool tips_unique = true;              // no other vertex sits on a tip location
};

MeshReport inspect_mesh(const SlitMesh& mesh);

/// Minimum interior angle every generated mesh must satisfy.
inline constexpr double kMinAngleDeg = 20.0;

/// Slit disk of the given radius. `base_resolution` segments on the outer
/// circle set the bulk size h0 = 2 pi R / base_resolution; `levels` geometric
/// refinements by `grading_ratio` shrink the element size at the tip to
/// h0 * grading_ratio^levels. Throws MeshQualityError if the minimum-angle
/// floor is not met.
SlitMesh make_slit_disk(double radius, int levels, double grading_ratio, int base_resolution);

/// Unit sphere with the half-equator cut, equator resolution `resolution`,
/// graded toward both cut end points.
SlitMesh make_slit_sphere(int resolution, int levels = 3, double grading_ratio = 0.5);

/// Branch-convention angle of every vertex: theta in [0, 2 pi] about the tip
/// (about the x1 axis on the sphere), 0 / 2 pi on the upper / lower slit copy.
std::vector<double> vertex_angles(const SlitMesh& mesh);

/// Side of each triangle relative to the slit (sign of its angular centroid).
Side triangle_side(const SlitMesh& mesh, int tri);

double triangle_area(const SlitMesh& mesh, int tri);

/// Line-based text format; doubles are written with 17 significant digits so
/// that write -> read is bit-exact.
void write_mesh(std::ostream& out, const SlitMesh& mesh);
SlitMesh read_mesh(std::istream& in);
void save_mesh(const std::string& path, const SlitMesh& mesh);
SlitMesh load_mesh(const std::string& path);

}  // namespace crackfreq
