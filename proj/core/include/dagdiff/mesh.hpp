#pragma once

#include <array>
#include <string>
#include <vector>

#include "dagdiff/geometry.hpp"
#include "dagdiff/point_cloud.hpp"
#include "dagdiff/rng.hpp"

namespace dagdiff {

/// Watertight triangle mesh. Faces are CCW when viewed from outside, so the
/// geometric face normal points out of the solid.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  Vec3 face_normal(int f) const;
  double face_area(int f) const;
  double surface_area() const;

  /// Signed volume via the divergence theorem (positive for outward-CCW).
  double volume() const;
  /// Volume centroid (not the vertex average).
  Vec3 centroid() const;

  void bounding_box(Vec3& lo, Vec3& hi) const;
  /// Radius of the sphere about `center` containing every vertex.
  double bounding_radius(const Vec3& center) const;

  /// True when every undirected edge is shared by exactly two faces with
  /// opposite winding.
  bool is_watertight() const;
};

/// Shape descriptor for the synthetic object generator.
struct ShapeSpec {
  enum class Kind { Box, Cylinder, CappedL, Plate };
  Kind kind = Kind::Box;
  // box: w,d,h | cylinder: r,h,segments | capped_l: arm_a,arm_b,thickness |
  // plate: w,d,t
  std::vector<double> params;

  std::string name() const;
  /// Parses "box", "box:0.2,0.2,0.2", "cylinder:0.05,0.3,32", ... Bare names
  /// get desk-scale default dimensions.
  static ShapeSpec parse(const std::string& text);
};

/// Builds a watertight primitive centered at its bounding-box center.
/// Throws InvalidDimensionError for non-positive sizes.
TriMesh make_primitive(const ShapeSpec& spec);

TriMesh make_box(double w, double d, double h);
TriMesh make_cylinder(double radius, double height, int segments);
/// L-shaped prism: two arms of the given lengths meeting at a corner, both
/// `thickness` wide, extruded by `thickness`.
TriMesh make_capped_l(double arm_a, double arm_b, double thickness);
TriMesh make_plate(double w, double d, double t);

/// Area-uniform surface sampling, deterministic given the seed.
PointCloud sample_surface(const TriMesh& m, int n, std::uint64_t seed);

/// Signed distance: min point-triangle distance over all faces, negative
/// inside. Inside/outside from the generalized winding number, which is
/// exact for watertight meshes.
double sdf(const TriMesh& m, const Vec3& x);

/// Ray-triangle intersection points along origin + t*dir, unsorted.
/// Returns (t, face index) pairs for t in [t_min, t_max].
std::vector<std::pair<double, int>> ray_hits(const TriMesh& m, const Vec3& origin,
                                             const Vec3& dir, double t_min,
                                             double t_max);

void save_obj(const std::string& path, const TriMesh& m);
TriMesh load_obj(const std::string& path);

}  // namespace dagdiff
