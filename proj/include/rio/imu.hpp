#pragma once

#include <span>
#include <vector>

#include "rio/geometry.hpp"

namespace rio {

struct ImuSample {
  double timestamp = 0;
  Vec3 gyro = Vec3::Zero();   // rad/s
  Vec3 accel = Vec3::Zero();  // m/s^2, specific force
};

struct ImuBias {
  Vec3 gyro = Vec3::Zero();
  Vec3 accel = Vec3::Zero();
};

struct ImuNoise {
  double gyro_noise_density = 1.7e-4;   // rad/s/sqrt(Hz)
  double accel_noise_density = 2.0e-3;  // m/s^2/sqrt(Hz)
  double gyro_bias_walk = 1.0e-5;       // rad/s^2/sqrt(Hz)
  double accel_bias_walk = 1.0e-4;      // m/s^3/sqrt(Hz)
  Vec3 gravity = Vec3(0, 0, -9.80665);  // world frame
};

/// Per-frame navigation state. Pose maps body to world; velocity is
/// expressed in the world frame.
struct FrameState {
  double timestamp = 0;
  Mat3 rotation = Mat3::Identity();
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  ImuBias bias;
};

/// Relative-motion deltas between two radar frames with first-order noise
/// covariance and bias Jacobians. Error order (rotation, velocity, position).
struct PreintegratedImu {
  Mat3 delta_rotation = Mat3::Identity();
  Vec3 delta_velocity = Vec3::Zero();
  Vec3 delta_position = Vec3::Zero();
  double delta_time = 0;
  double start_time = 0;
  double end_time = 0;
  Mat9 covariance = Mat9::Zero();
  Mat3 d_rotation_d_bg = Mat3::Zero();
  Mat3 d_velocity_d_bg = Mat3::Zero();
  Mat3 d_velocity_d_ba = Mat3::Zero();
  Mat3 d_position_d_bg = Mat3::Zero();
  Mat3 d_position_d_ba = Mat3::Zero();
  ImuBias linearization_bias;
};

/// Midpoint-rule preintegration of bias-corrected samples; gravity is
/// excluded from the deltas by definition.
PreintegratedImu preintegrate(std::span<const ImuSample> samples, const ImuBias& bias,
                              const ImuNoise& noise);

/// Samples covering [t0, t1] with boundary samples linearly interpolated to
/// the exact interval endpoints.
std::vector<ImuSample> slice_interval(std::span<const ImuSample> stream, double t0, double t1);

struct ImuResidualJacobians {
  // Columns per state: [rotation(3), position(3), velocity(3), bg(3), ba(3)].
  Eigen::Matrix<double, 9, 15> d_state_i = Eigen::Matrix<double, 9, 15>::Zero();
  Eigen::Matrix<double, 9, 15> d_state_j = Eigen::Matrix<double, 9, 15>::Zero();
};

/// Preintegration residual (rotation log-map, velocity, position), bias
/// corrected to first order via the stored Jacobians.
Vec9 imu_residual(const FrameState& state_i, const FrameState& state_j,
                  const PreintegratedImu& preint, const Vec3& gravity,
                  ImuResidualJacobians* jacobians = nullptr);

}  // namespace rio
