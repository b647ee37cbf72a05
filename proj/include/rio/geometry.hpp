#pragma once

#include "rio/core.hpp"

namespace rio {

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(),  //
      v.z(), 0, -v.x(),   //
      -v.y(), v.x(), 0;
  return m;
}

/// SO(3) exponential map (axis-angle vector to rotation matrix).
inline Mat3 so3_exp(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 s = skew(phi);
  if (theta < 1e-9) {
    return Mat3::Identity() + s + 0.5 * s * s;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + a * s + b * s * s;
}

/// SO(3) logarithm; returns the rotation vector with |phi| in [0, pi].
inline Vec3 so3_log(const Mat3& r) {
  const double cos_theta = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  const Vec3 axis_raw(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (theta < 1e-9) {
    return 0.5 * axis_raw;
  }
  if (theta > M_PI - 1e-6) {
    // Near pi the off-diagonal difference loses precision; recover the axis
    // from the symmetric part instead.
    Vec3 axis;
    const Mat3 sym = 0.5 * (r + Mat3::Identity());
    int k;
    sym.diagonal().maxCoeff(&k);
    axis = sym.col(k) / std::sqrt(std::max(sym(k, k), 1e-16));
    axis.normalize();
    // Fix the sign using the skew part where it is still nonzero.
    if (axis_raw.dot(axis) < 0) axis = -axis;
    return theta * axis;
  }
  return (0.5 * theta / std::sin(theta)) * axis_raw;
}

/// Right Jacobian of SO(3): Exp(phi + d) ~ Exp(phi) Exp(Jr(phi) d).
inline Mat3 so3_right_jacobian(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 s = skew(phi);
  if (theta < 1e-6) {
    return Mat3::Identity() - 0.5 * s + (1.0 / 6.0) * s * s;
  }
  const double t2 = theta * theta;
  const double a = (1.0 - std::cos(theta)) / t2;
  const double b = (theta - std::sin(theta)) / (t2 * theta);
  return Mat3::Identity() - a * s + b * s * s;
}

inline Mat3 so3_right_jacobian_inverse(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 s = skew(phi);
  if (theta < 1e-6) {
    return Mat3::Identity() + 0.5 * s + (1.0 / 12.0) * s * s;
  }
  const double t2 = theta * theta;
  const double b = 1.0 / t2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() + 0.5 * s + b * s * s;
}

/// Rigid transform, rotation + translation (frame a <- frame b).
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Pose inverse() const { return {rotation.transpose(), -(rotation.transpose() * translation)}; }

  Pose operator*(const Pose& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }
};

struct TimedPose {
  double timestamp = 0;
  Pose pose;
};

using Trajectory = std::vector<TimedPose>;

inline Mat3 rot_z(double yaw) {
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

}  // namespace rio
