#include "crackfreq/locator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crackfreq/errors.hpp"

namespace crackfreq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double segment_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d d = b - a;
  const double len2 = d.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp(-a.dot(d) / len2, 0.0, 1.0) : 0.0;
  return (a + t * d).norm();
}

}  // namespace

double branch_angle(const Eigen::Vector2d& p, Side side) {
  if (p.y() == 0.0 && p.x() >= 0.0) return side == Side::upper ? 0.0 : kTwoPi;
  const double a = std::atan2(p.y(), p.x());
  return a < 0.0 ? a + kTwoPi : a;
}

PointLocator::PointLocator(std::shared_ptr<const SlitMesh> mesh) : mesh_(std::move(mesh)) {
  if (mesh_->kind != SlitMesh::Kind::disk)
    throw InvalidArgument("PointLocator: only slit disk meshes are supported");
  const SlitMesh& m = *mesh_;
  const std::vector<double> theta = vertex_angles(m);
  radial_bins_ = static_cast<int>(m.layer_radii.size()) + 1;
  bins_.assign(static_cast<std::size_t>(radial_bins_) * angular_bins_, {});
  tri_side_.resize(m.triangles.size());

  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    tri_side_[t] = triangle_side(m, static_cast<int>(t));
    double tmin = kTwoPi;
    double tmax = 0.0;
    double rmax = 0.0;
    bool has_tip = false;
    for (int k = 0; k < 3; ++k) {
      const int v = tri[k];
      rmax = std::max(rmax, m.vertices[v].head<2>().norm());
      if (v == m.tip_vertex_id()) {
        has_tip = true;
        continue;
      }
      // Upper slit copies read 0, lower copies 2 pi; a triangle on the lower
      // face therefore spans angles just below 2 pi.
      double a = theta[v];
      if (a == 0.0 && tri_side_[t] == Side::lower) a = kTwoPi;
      tmin = std::min(tmin, a);
      tmax = std::max(tmax, a);
    }
    double rmin = 0.0;
    if (!has_tip) {
      const Eigen::Vector2d a = m.vertices[tri[0]].head<2>();
      const Eigen::Vector2d b = m.vertices[tri[1]].head<2>();
      const Eigen::Vector2d c = m.vertices[tri[2]].head<2>();
      rmin = std::min({segment_distance(a, b), segment_distance(b, c), segment_distance(c, a)});
    }
    const int r0 = radial_bin(rmin);
    const int r1 = radial_bin(rmax);
    const int a0 = angular_bin(tmin);
    const int a1 = angular_bin(tmax);
    for (int rb = r0; rb <= r1; ++rb)
      for (int ab = a0; ab <= a1; ++ab)
        bins_[static_cast<std::size_t>(rb) * angular_bins_ + ab].push_back(static_cast<int>(t));
  }
}

int PointLocator::radial_bin(double r) const {
  const auto& layers = mesh_->layer_radii;
  // upper_bound so that a point exactly on a ring radius shares the bin of
  // triangles whose polygonal edge dips below that radius.
  const int idx = static_cast<int>(std::upper_bound(layers.begin(), layers.end(), r) - layers.begin());
  return std::min(idx, radial_bins_ - 1);
}

int PointLocator::angular_bin(double theta) const {
  const int b = static_cast<int>(theta / kTwoPi * angular_bins_);
  return std::clamp(b, 0, angular_bins_ - 1);
}

std::array<double, 3> PointLocator::barycentric(int tri, const Eigen::Vector2d& p) const {
  const auto& t = mesh_->triangles[tri];
  const Eigen::Vector2d a = mesh_->vertices[t[0]].head<2>();
  const Eigen::Vector2d b = mesh_->vertices[t[1]].head<2>();
  const Eigen::Vector2d c = mesh_->vertices[t[2]].head<2>();
  const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
  const double l1 = ((p.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (p.y() - a.y())) / det;
  const double l2 = ((b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y())) / det;
  return {1.0 - l1 - l2, l1, l2};
}

PointLocator::Hit PointLocator::locate(const Eigen::Vector2d& p, Side side) const {
  const bool on_slit = p.y() == 0.0 && p.x() > 0.0;
  Hit best;
  double best_score = -std::numeric_limits<double>::infinity();
  auto consider = [&](int tri) {
    if (on_slit && tri_side_[tri] != side) return;
    const auto bary = barycentric(tri, p);
    const double score = std::min({bary[0], bary[1], bary[2]});
    if (score > best_score) {
      best_score = score;
      best.triangle = tri;
      best.bary = bary;
    }
  };

  const int rb = radial_bin(p.norm());
  const int ab = angular_bin(branch_angle(p, side));
  for (int tri : bins_[static_cast<std::size_t>(rb) * angular_bins_ + ab]) consider(tri);
  constexpr double kInside = -1e-12;
  if (best_score >= kInside) return best;

  // Neighbouring bins, then everything.
  for (int dr = -1; dr <= 1; ++dr) {
    for (int da = -1; da <= 1; ++da) {
      const int r = rb + dr;
      const int a = ab + da;
      if (r < 0 || r >= radial_bins_ || a < 0 || a >= angular_bins_) continue;
      for (int tri : bins_[static_cast<std::size_t>(r) * angular_bins_ + a]) consider(tri);
    }
  }
  if (best_score >= kInside) return best;
  for (std::size_t tri = 0; tri < mesh_->triangles.size(); ++tri) consider(static_cast<int>(tri));
  // Points just past the polygonal boundary (within a fraction of an element).
  if (best_score >= -0.05) return best;
  throw OutsideMesh("PointLocator: point lies outside the mesh");
}

}  // namespace crackfreq
