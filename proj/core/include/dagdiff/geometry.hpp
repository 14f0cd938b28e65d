#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

#include "dagdiff/errors.hpp"

namespace dagdiff {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Tangent vector of one SE(3) pose. Ordering convention throughout the
/// library: components [0..3) translational (meters), [3..6) rotational
/// (radians). The round-trip tests pin this down.
using Twist6 = Eigen::Matrix<double, 6, 1>;

/// Stacked tangent of a pose pair: [twist of first arm ; twist of second].
using Twist12 = Eigen::Matrix<double, 12, 1>;

/// Rigid transform in SE(3), stored as rotation matrix + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  Pose operator*(const Pose& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  Pose inverse() const {
    Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  static Pose from_matrix(const Mat4& m) {
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  }
};

/// A pair of rigid poses, one per arm. The sample space of the generator.
struct DualPose {
  Pose first;
  Pose second;

  static DualPose identity() { return {}; }
};

Mat3 skew(const Vec3& v);

/// Left Jacobian of SO(3): exp((w + d)^) ~= exp((J_l(w) d)^) exp(w^).
Mat3 so3_left_jacobian(const Vec3& omega);
Mat3 so3_left_jacobian_inverse(const Vec3& omega);

Mat3 so3_exp(const Vec3& omega);

/// Throws AngleNearPiError when the rotation angle is within 1e-6 of pi.
Vec3 so3_log(const Mat3& rotation);

/// Rotation angle in [0, pi].
double rotation_angle(const Mat3& rotation);

/// se(3) -> SE(3). Rodrigues for the rotation, left Jacobian for the
/// translation. Small angles handled by series expansion.
Pose expmap(const Twist6& t);

/// SE(3) -> se(3), inverse of expmap. Throws AngleNearPiError near the
/// log-map singularity (callers resample or perturb).
Twist6 logmap(const Pose& p);

/// R^12 -> SE(3) x SE(3), acting block-wise per arm.
DualPose expmap2(const Twist12& v);

/// SE(3) x SE(3) -> R^12, vertical concatenation of the per-arm logs.
Twist12 logmap2(const DualPose& h);

/// Left-multiplicative (world-frame) update: (exp(u1) h1, exp(u2) h2).
/// This is the reverse-step composition rule.
DualPose left_update(const DualPose& h, const Twist12& u);

std::vector<Vec3> transform_points(const Pose& p, const std::vector<Vec3>& pts);

/// Jacobian of the world position of `x_local` with respect to a left
/// perturbation twist of `p`: columns [0..3) = I, columns [3..6) = -[y]x
/// with y the world point. Column order matches the twist convention.
Eigen::Matrix<double, 3, 6> point_pose_jacobian(const Pose& p, const Vec3& x_local);

}  // namespace dagdiff
