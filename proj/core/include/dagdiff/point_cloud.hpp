#pragma once

#include <string>
#include <vector>

#include "dagdiff/geometry.hpp"

namespace dagdiff {

/// Object surface point cloud, n >= 1 finite points.
struct PointCloud {
  std::vector<Vec3> points;

  int size() const { return static_cast<int>(points.size()); }

  Vec3 centroid() const;
  void bounding_box(Vec3& lo, Vec3& hi) const;

  /// Cloud translated so its centroid is at the origin; the applied offset
  /// is returned through `offset` (new = old - offset).
  PointCloud centered(Vec3* offset = nullptr) const;
};

/// ASCII PLY with float x,y,z properties. Extra properties are ignored on
/// load; coordinates round-trip losslessly at float precision.
PointCloud load_ply(const std::string& path);
void save_ply(const std::string& path, const PointCloud& cloud);

}  // namespace dagdiff
