#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dagdiff/geometry.hpp"
#include "dagdiff/mesh.hpp"
#include "dagdiff/point_cloud.hpp"

namespace dagdiff {

/// Frictional point contact: position plus inward (into the object) unit
/// normal.
struct Contact {
  Vec3 position;
  Vec3 normal;
};

/// Axis-aligned box in the gripper's local frame.
struct BodyBox {
  Vec3 center;
  Vec3 half_extents;
};

/// Parallel-jaw gripper. Local frame: origin at the midpoint between the
/// fingertips, closing axis +x, approach axis +z (the body sits at z < 0).
/// The 30 query points are a fixed probe template rigidly attached to each
/// grasp pose; the body boxes (palm + two fingers at full opening)
/// approximate the gripper volume for collision tests. The inter-finger
/// closing region is deliberately not part of the body volume.
struct GripperModel {
  std::vector<Vec3> query_points;  // exactly 30
  std::vector<BodyBox> body_boxes;
  double max_width = 0.08;
  Vec3 closing_axis = Vec3::UnitX();
  Vec3 approach_axis = Vec3::UnitZ();

  double finger_length = 0.05;
  double finger_thickness = 0.01;
  double finger_height = 0.02;
  double palm_depth = 0.02;

  /// Panda-style defaults (max width 0.08 m).
  static GripperModel panda();

  std::string to_json() const;
  static GripperModel from_json(const std::string& json_text);
  static GripperModel load(const std::string& path);
  void save(const std::string& path) const;
};

/// Both arms' transformed query points: first 30 from h.first, last 30 from
/// h.second.
std::vector<Vec3> grasp_query_points(const DualPose& h, const GripperModel& g);

/// Casts the closing line through the grasp center (extent +-max_width/2)
/// and returns the two outermost surface hits with inward normals, or
/// nothing when a jaw misses or the opening exceeds max_width.
std::optional<std::pair<Contact, Contact>> find_contacts(const TriMesh& m,
                                                         const Pose& p,
                                                         const GripperModel& g);

/// True iff any cloud point lies inside any body box inflated by `inflate`.
bool check_collision(const PointCloud& cloud, const Pose& p,
                     const GripperModel& g, double inflate);

/// Rejection-samples antipodal surface grasps: contact pairs whose normals
/// oppose within the friction cone and fit in the jaw, posed with uniform
/// roll about the closing axis, kept only when collision-free against a
/// dense surface cloud at inflate = 0. Deterministic given the seed.
/// Throws SamplingExhaustedError when the acceptance rate collapses.
std::vector<Pose> sample_antipodal_grasps(const TriMesh& m, int count, double mu,
                                          std::uint64_t seed,
                                          const GripperModel& g);

}  // namespace dagdiff
