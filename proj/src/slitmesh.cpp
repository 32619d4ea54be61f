#include "crackfreq/slitmesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <set>

#include "crackfreq/errors.hpp"

namespace crackfreq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kFanCount = 12;
constexpr int kFanMax = 17;

/// Radii (ascending) and segment counts of the rings around one tip.
struct RingPlan {
  std::vector<double> radii;
  std::vector<int> counts;
};

RingPlan finish_plan(std::vector<double> radii, std::vector<int> counts) {
  // No ring may have more than twice the segments of its inner neighbour.
  for (std::size_t j = counts.size() - 1; j > 0; --j)
    counts[j - 1] = std::min(counts[j - 1], 2 * counts[j]);
  for (std::size_t j = 1; j < counts.size(); ++j) counts[j] = std::min(counts[j], 2 * counts[j - 1]);
  std::reverse(radii.begin(), radii.end());
  std::reverse(counts.begin(), counts.end());
  return {radii, counts};
}

/// Marches inward from `extent` with the size function
///   h(r) = min(h0, max(kappa r, h_tip))
/// (uniform bulk, geometric layers, uniform tip core) until the next ring
/// would carry fewer than kFanCount segments; the tip is then fanned.
/// The geometric layers are snapped to end exactly at h_tip / kappa, so the
/// core is the same pattern scaled by h_tip at every level count.
template <class Circumference>
RingPlan plan_rings(double extent, Circumference circumference, double h0, double kappa,
                    double h_tip, int outer_count) {
  std::vector<double> radii{extent};
  std::vector<int> counts{outer_count};
  auto push = [&](double r, double h) {
    const int n = static_cast<int>(std::lround(circumference(r) / h));
    if (n < kFanCount) return false;
    radii.push_back(r);
    counts.push_back(n);
    return true;
  };
  // Bulk, stopping while the next ring still falls in the graded zone.
  while (kappa * (radii.back() - h0) >= h0) {
    if (!push(radii.back() - h0, h0)) return finish_plan(radii, counts);
  }
  // Geometric layers down to the core radius. A fraction of a step below
  // 0.3 is dropped rather than left as a sliver ring.
  const double core = h_tip / kappa;
  if (radii.back() > core) {
    const double steps = std::log(core / radii.back()) / std::log1p(-kappa);
    const int m = std::max(0, static_cast<int>(std::ceil(steps - 0.3)));
    const double ratio = m > 0 ? std::pow(core / radii.back(), 1.0 / m) : 1.0;
    const double start = radii.back();
    for (int j = 1; j <= m; ++j) {
      const double r = j == m ? core : start * std::pow(ratio, j);
      if (!push(r, kappa * r)) return finish_plan(radii, counts);
    }
  }
  // Uniform core. The fan needs a ring of at most kFanMax segments, so a
  // last ring of exactly kFanCount segments is added when required.
  for (;;) {
    const double next = radii.back() - h_tip;
    if (next > 0.0 && push(next, h_tip)) continue;
    if (counts.back() > kFanMax) {
      double lo = 0.0, hi = radii.back();
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (circumference(mid) / h_tip < kFanCount ? lo : hi) = mid;
      }
      radii.push_back(hi);
      counts.push_back(kFanCount);
    }
    break;
  }
  return finish_plan(radii, counts);
}

/// Adds triangles between ring `inner` and ring `outer` (vertex id lists
/// ordered by angle from 0 to 2 pi). Triangles stay on one side of the slit
/// because both lists are monotone in angle.
void stitch(std::vector<std::array<int, 3>>& tris, const std::vector<int>& inner,
            const std::vector<double>& inner_theta, const std::vector<int>& outer,
            const std::vector<double>& outer_theta,
            const std::vector<Eigen::Vector3d>& verts) {
  const std::size_t na = inner.size() - 1;
  const std::size_t nb = outer.size() - 1;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < na || j < nb) {
    bool advance_inner;
    if (i == na) {
      advance_inner = false;
    } else if (j == nb) {
      advance_inner = true;
    } else if (inner_theta[i + 1] != outer_theta[j + 1]) {
      advance_inner = inner_theta[i + 1] < outer_theta[j + 1];
    } else {
      const double d_inner = (verts[outer[j]] - verts[inner[i + 1]]).norm();
      const double d_outer = (verts[inner[i]] - verts[outer[j + 1]]).norm();
      advance_inner = d_inner <= d_outer;
    }
    if (advance_inner) {
      tris.push_back({inner[i], outer[j], inner[i + 1]});
      ++i;
    } else {
      tris.push_back({inner[i], outer[j], outer[j + 1]});
      ++j;
    }
  }
}

double corner_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const Eigen::Vector3d u = b - a;
  const Eigen::Vector3d v = c - a;
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

/// Builds the ring structure around one or two tips. `place(r, theta)` maps a
/// ring coordinate to a point; `rings` lists ring radii from the first tip,
/// and `second_tip` closes the far end (sphere).
SlitMesh assemble_rings(SlitMesh::Kind kind, const std::vector<double>& rings,
                        const std::vector<int>& counts, bool second_tip,
                        const std::function<Eigen::Vector3d(double, double)>& place,
                        const Eigen::Vector3d& tip_a, const Eigen::Vector3d& tip_b) {
  SlitMesh mesh;
  mesh.kind = kind;
  mesh.vertices.push_back(tip_a);
  mesh.tip_vertex_ids.push_back(0);
  std::vector<int> prev{0, 0};
  std::vector<double> prev_theta{0.0, kTwoPi};
  bool prev_is_tip = true;
  for (std::size_t ring = 0; ring < rings.size(); ++ring) {
    const int n = counts[ring];
    std::vector<int> ids(n + 1);
    std::vector<double> theta(n + 1);
    for (int i = 0; i <= n; ++i) {
      theta[i] = (i == n) ? kTwoPi : kTwoPi * i / n;
      ids[i] = static_cast<int>(mesh.vertices.size());
      // Both slit copies get the exact same coordinates.
      mesh.vertices.push_back(place(rings[ring], (i == n) ? 0.0 : theta[i]));
    }
    mesh.crack_pairs.emplace_back(ids.front(), ids.back());
    if (prev_is_tip) {
      for (int i = 0; i < n; ++i) mesh.triangles.push_back({0, ids[i], ids[i + 1]});
    } else {
      stitch(mesh.triangles, prev, prev_theta, ids, theta, mesh.vertices);
    }
    prev = std::move(ids);
    prev_theta = std::move(theta);
    prev_is_tip = false;
  }
  if (second_tip) {
    const int tip = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(tip_b);
    mesh.tip_vertex_ids.push_back(tip);
    for (std::size_t i = 0; i + 1 < prev.size(); ++i)
      mesh.triangles.push_back({prev[i], tip, prev[i + 1]});
  } else {
    mesh.outer_boundary_ids = prev;
  }
  mesh.layer_radii = rings;
  return mesh;
}

void require_quality(const SlitMesh& mesh, const char* what) {
  const MeshReport rep = inspect_mesh(mesh);
  if (rep.min_angle_deg < kMinAngleDeg)
    throw MeshQualityError(std::string(what) + ": minimum angle " +
                           std::to_string(rep.min_angle_deg) + " deg below the 20 deg floor");
  if (!rep.positively_oriented) throw MeshQualityError(std::string(what) + ": inverted triangle");
}

}  // namespace

int SlitMesh::layers_inside(double r) const {
  return static_cast<int>(std::lower_bound(layer_radii.begin(), layer_radii.end(), r) -
                          layer_radii.begin());
}

SlitMesh make_slit_disk(double radius, int levels, double grading_ratio, int base_resolution) {
  if (!(radius > 0.0)) throw InvalidArgument("make_slit_disk: radius must be positive");
  if (levels < 0) throw InvalidArgument("make_slit_disk: levels must be >= 0");
  if (!(grading_ratio > 0.1 && grading_ratio < 0.9))
    throw InvalidArgument("make_slit_disk: grading_ratio must lie in (0.1, 0.9)");
  if (base_resolution < 8) throw InvalidArgument("make_slit_disk: base_resolution must be >= 8");

  const double h0 = kTwoPi * radius / base_resolution;
  const int graded_count = std::clamp(base_resolution / 2, 16, 64);
  const double kappa = kTwoPi / graded_count;
  const double h_tip = h0 * std::pow(grading_ratio, levels);
  const RingPlan plan = plan_rings(
      radius, [](double r) { return kTwoPi * r; }, h0, kappa, h_tip,
      std::max(base_resolution, graded_count));

  SlitMesh mesh = assemble_rings(
      SlitMesh::Kind::disk, plan.radii, plan.counts, false,
      [](double r, double t) { return Eigen::Vector3d(r * std::cos(t), r * std::sin(t), 0.0); },
      Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero());
  mesh.radius = radius;
  mesh.grading_ratio = grading_ratio;
  mesh.levels = levels;
  require_quality(mesh, "make_slit_disk");
  return mesh;
}

SlitMesh make_slit_sphere(int resolution, int levels, double grading_ratio) {
  if (resolution < 16) throw InvalidArgument("make_slit_sphere: resolution must be >= 16");
  if (levels < 0) throw InvalidArgument("make_slit_sphere: levels must be >= 0");
  if (!(grading_ratio > 0.1 && grading_ratio < 0.9))
    throw InvalidArgument("make_slit_sphere: grading_ratio must lie in (0.1, 0.9)");

  const double h0 = kTwoPi / resolution;
  const int graded_count = std::clamp(resolution / 2, 16, 64);
  const double kappa = kTwoPi / graded_count;
  const double h_tip = h0 * std::pow(grading_ratio, levels);
  const double half = 0.5 * std::numbers::pi;
  const RingPlan plan = plan_rings(
      half, [](double d) { return kTwoPi * std::sin(d); }, h0, kappa, h_tip,
      std::max(resolution, graded_count));

  // Mirror the rings of one hemisphere onto the other.
  std::vector<double> rings = plan.radii;
  std::vector<int> counts = plan.counts;
  for (std::size_t j = plan.radii.size() - 1; j-- > 0;) {
    rings.push_back(std::numbers::pi - plan.radii[j]);
    counts.push_back(plan.counts[j]);
  }

  // Colatitude phi from (1,0,0); angle t about the x1 axis, t = 0 on the cut.
  auto place = [](double phi, double t) {
    const double s = std::sin(phi);
    Eigen::Vector3d p(std::cos(phi), s * std::cos(t), s * std::sin(t));
    return Eigen::Vector3d(p / p.norm());
  };
  SlitMesh mesh = assemble_rings(SlitMesh::Kind::sphere, rings, counts, true, place,
                                 Eigen::Vector3d(1.0, 0.0, 0.0), Eigen::Vector3d(-1.0, 0.0, 0.0));
  mesh.radius = 1.0;
  mesh.grading_ratio = grading_ratio;
  mesh.levels = levels;
  require_quality(mesh, "make_slit_sphere");
  return mesh;
}

std::vector<double> vertex_angles(const SlitMesh& mesh) {
  std::vector<double> theta(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Eigen::Vector3d& p = mesh.vertices[v];
    const double a = mesh.kind == SlitMesh::Kind::disk ? std::atan2(p.y(), p.x())
                                                       : std::atan2(p.z(), p.y());
    theta[v] = a < 0.0 ? a + kTwoPi : a;
  }
  for (const auto& [up, low] : mesh.crack_pairs) {
    theta[up] = 0.0;
    theta[low] = kTwoPi;
  }
  for (int t : mesh.tip_vertex_ids) theta[t] = 0.0;
  return theta;
}

Side triangle_side(const SlitMesh& mesh, int tri) {
  const auto& t = mesh.triangles[tri];
  const Eigen::Vector3d c = (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
  const double s = mesh.kind == SlitMesh::Kind::disk ? c.y() : c.z();
  return s >= 0.0 ? Side::upper : Side::lower;
}

double triangle_area(const SlitMesh& mesh, int tri) {
  const auto& t = mesh.triangles[tri];
  const Eigen::Vector3d& a = mesh.vertices[t[0]];
  return 0.5 * (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a).norm();
}

MeshReport inspect_mesh(const SlitMesh& mesh) {
  MeshReport rep;
  rep.vertex_count = static_cast<int>(mesh.vertices.size());
  rep.triangle_count = static_cast<int>(mesh.triangles.size());
  rep.min_angle_deg = 180.0;

  std::map<std::pair<int, int>, std::vector<int>> edges;
  std::set<int> tips(mesh.tip_vertex_ids.begin(), mesh.tip_vertex_ids.end());
  std::vector<int> slit_side(mesh.vertices.size(), 0);  // +1 upper copy, -1 lower copy
  for (const auto& [up, low] : mesh.crack_pairs) {
    slit_side[up] = 1;
    slit_side[low] = -1;
    if (mesh.vertices[up] != mesh.vertices[low]) rep.pairs_coincide = false;
  }

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Eigen::Vector3d& a = mesh.vertices[tri[0]];
    const Eigen::Vector3d& b = mesh.vertices[tri[1]];
    const Eigen::Vector3d& c = mesh.vertices[tri[2]];
    const Eigen::Vector3d normal = (b - a).cross(c - a);
    const double orient = mesh.kind == SlitMesh::Kind::disk ? normal.z()
                                                            : normal.dot(a + b + c);
    if (!(orient > 0.0)) rep.positively_oriented = false;
    rep.area += 0.5 * normal.norm();
    const double angles[3] = {corner_angle(a, b, c), corner_angle(b, c, a), corner_angle(c, a, b)};
    for (double ang : angles) {
      rep.min_angle_deg = std::min(rep.min_angle_deg, ang * 180.0 / std::numbers::pi);
      rep.max_angle_deg = std::max(rep.max_angle_deg, ang * 180.0 / std::numbers::pi);
    }
    const double diam = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    rep.max_diameter = std::max(rep.max_diameter, diam);
    bool has_up = false;
    bool has_low = false;
    bool has_tip = false;
    for (int k = 0; k < 3; ++k) {
      has_up |= slit_side[tri[k]] == 1;
      has_low |= slit_side[tri[k]] == -1;
      has_tip |= tips.count(tri[k]) > 0;
      const int u = tri[k];
      const int v = tri[(k + 1) % 3];
      edges[{std::min(u, v), std::max(u, v)}].push_back(static_cast<int>(t));
    }
    if (has_up && has_low) rep.sides_separated = false;
    if (has_tip) rep.tip_diameter = std::max(rep.tip_diameter, diam);
  }
  rep.edge_count = static_cast<int>(edges.size());
  rep.euler_characteristic = rep.vertex_count - rep.edge_count + rep.triangle_count;

  std::set<int> outer(mesh.outer_boundary_ids.begin(), mesh.outer_boundary_ids.end());
  auto on_slit_or_tip = [&](int v) { return slit_side[v] != 0 || tips.count(v) > 0; };
  for (const auto& [edge, owners] : edges) {
    const auto [u, v] = edge;
    const bool slit_edge = on_slit_or_tip(u) && on_slit_or_tip(v) &&
                           !(tips.count(u) && tips.count(v)) &&
                           (slit_side[u] == 0 || slit_side[v] == 0 || slit_side[u] == slit_side[v]);
    const bool outer_edge = outer.count(u) > 0 && outer.count(v) > 0;
    if (slit_edge) {
      if (owners.size() != 1) {
        rep.slit_edges_single_sided = false;
        continue;
      }
      const int face = slit_side[u] != 0 ? slit_side[u] : slit_side[v];
      const Side side = triangle_side(mesh, owners.front());
      if ((face == 1) != (side == Side::upper)) rep.slit_edges_single_sided = false;
    } else if (!outer_edge && owners.size() != 2) {
      rep.interior_edges_manifold = false;
    }
  }

  for (int tip : mesh.tip_vertex_ids)
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
      if (static_cast<int>(v) != tip && mesh.vertices[v] == mesh.vertices[tip])
        rep.tips_unique = false;
  return rep;
}

}  // namespace crackfreq
