#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <vector>

#include "crackfreq/slitmesh.hpp"

namespace crackfreq {

/// Branch-convention angle of a planar point in [0, 2 pi]. Points on the slit
/// (y == 0, x > 0) resolve to 0 on the upper face and 2 pi on the lower face.
double branch_angle(const Eigen::Vector2d& p, Side side);

/// Side-aware point location on a slit disk mesh. Triangles are binned by
/// (graded layer, angular sector), so lookups cost O(1) on graded meshes.
class PointLocator {
 public:
  struct Hit {
    int triangle = -1;
    std::array<double, 3> bary{};
  };

  explicit PointLocator(std::shared_ptr<const SlitMesh> mesh);

  /// Containing triangle and barycentric coordinates. Points within a small
  /// distance outside the polygonal outer boundary snap to the nearest
  /// triangle (linear extrapolation); anything farther throws OutsideMesh.
  Hit locate(const Eigen::Vector2d& p, Side side) const;

  const SlitMesh& mesh() const { return *mesh_; }

 private:
  std::array<double, 3> barycentric(int tri, const Eigen::Vector2d& p) const;
  int radial_bin(double r) const;
  int angular_bin(double theta) const;

  std::shared_ptr<const SlitMesh> mesh_;
  std::vector<Side> tri_side_;
  int angular_bins_ = 64;
  int radial_bins_ = 1;
  std::vector<std::vector<int>> bins_;
};

}  // namespace crackfreq
