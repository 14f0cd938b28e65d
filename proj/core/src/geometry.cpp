#include "dagdiff/geometry.hpp"

#include <cmath>

namespace dagdiff {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kSmallAngle = 1e-8;
constexpr double kPiMargin = 1e-6;
}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<     0, -v.z(),  v.y(),
       v.z(),      0, -v.x(),
      -v.y(),  v.x(),      0;
  // clang-format on
  return s;
}

Mat3 so3_left_jacobian(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  if (theta < kSmallAngle) {
    // V = I + w/2 + w^2/6 + O(theta^3)
    return Mat3::Identity() + 0.5 * w + (1.0 / 6.0) * w * w;
  }
  const double t2 = theta * theta;
  const double a = (1.0 - std::cos(theta)) / t2;
  const double b = (theta - std::sin(theta)) / (t2 * theta);
  return Mat3::Identity() + a * w + b * w * w;
}

Mat3 so3_left_jacobian_inverse(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  if (theta < 1e-4) {
    // c = 1/12 + theta^2/720 + theta^4/30240 + ...
    const double t2 = theta * theta;
    const double c = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
    return Mat3::Identity() - 0.5 * w + c * w * w;
  }
  // c = (1 - (theta/2) cot(theta/2)) / theta^2, stable away from 2*pi.
  const double half = 0.5 * theta;
  const double c = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  return Mat3::Identity() - 0.5 * w + c * w * w;
}

Mat3 so3_exp(const Vec3& omega) {
  const double theta = omega.norm();
  if (theta < kSmallAngle) {
    const Mat3 w = skew(omega);
    return Mat3::Identity() + w + 0.5 * w * w;
  }
  return Eigen::AngleAxisd(theta, omega / theta).toRotationMatrix();
}

double rotation_angle(const Mat3& rotation) {
  // trace = 1 + 2 cos(theta); clamp for numerical safety.
  const double c = std::clamp((rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c);
}

Vec3 so3_log(const Mat3& rotation) {
  const double angle = rotation_angle(rotation);
  if (angle > kPi - kPiMargin) {
    throw AngleNearPiError("rotation angle within 1e-6 of pi; log map branch undefined");
  }
  if (angle < kSmallAngle) {
    // log(R) ~= (R - R^T)/2 to first order.
    Vec3 w;
    w << rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
        rotation(1, 0) - rotation(0, 1);
    return 0.5 * w;
  }
  Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

Pose expmap(const Twist6& t) {
  const Vec3 v = t.head<3>();
  const Vec3 omega = t.tail<3>();
  Pose p;
  p.rotation = so3_exp(omega);
  p.translation = so3_left_jacobian(omega) * v;
  return p;
}

Twist6 logmap(const Pose& p) {
  const Vec3 omega = so3_log(p.rotation);
  const Vec3 v = so3_left_jacobian_inverse(omega) * p.translation;
  Twist6 t;
  t << v, omega;
  return t;
}

DualPose expmap2(const Twist12& v) {
  return {expmap(v.head<6>()), expmap(v.tail<6>())};
}

Twist12 logmap2(const DualPose& h) {
  Twist12 v;
  v << logmap(h.first), logmap(h.second);
  return v;
}

DualPose left_update(const DualPose& h, const Twist12& u) {
  return {expmap(u.head<6>()) * h.first, expmap(u.tail<6>()) * h.second};
}

std::vector<Vec3> transform_points(const Pose& p, const std::vector<Vec3>& pts) {
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const Vec3& x : pts) out.push_back(p.apply(x));
  return out;
}

Eigen::Matrix<double, 3, 6> point_pose_jacobian(const Pose& p, const Vec3& x_local) {
  Eigen::Matrix<double, 3, 6> j;
  j.leftCols<3>() = Mat3::Identity();
  j.rightCols<3>() = -skew(p.apply(x_local));
  return j;
}

}  // namespace dagdiff
