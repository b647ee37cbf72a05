#include "rio/imu.hpp"

#include <algorithm>

namespace rio {

namespace {

constexpr double kMinInterval = 1e-6;      // s
constexpr double kTimestampSlack = 1e-3;   // s
constexpr double kCovarianceFloor = 1e-14; // keeps whitening well posed

ImuSample interpolate(const ImuSample& a, const ImuSample& b, double t) {
  const double w = (t - a.timestamp) / (b.timestamp - a.timestamp);
  ImuSample out;
  out.timestamp = t;
  out.gyro = a.gyro + w * (b.gyro - a.gyro);
  out.accel = a.accel + w * (b.accel - a.accel);
  return out;
}

}  // namespace

std::vector<ImuSample> slice_interval(std::span<const ImuSample> stream, double t0, double t1) {
  if (t1 - t0 < kMinInterval) fail("invalid-argument", "degenerate IMU interval");
  if (stream.size() < 2 || stream.front().timestamp > t0 || stream.back().timestamp < t1) {
    fail("insufficient-points", "IMU stream does not cover the requested interval");
  }
  auto after_t0 = std::upper_bound(stream.begin(), stream.end(), t0,
                                   [](double t, const ImuSample& s) { return t < s.timestamp; });
  std::vector<ImuSample> out;
  out.push_back(interpolate(*(after_t0 - 1), *after_t0, t0));
  for (auto it = after_t0; it != stream.end() && it->timestamp < t1; ++it) {
    out.push_back(*it);
  }
  auto after_t1 = std::lower_bound(stream.begin(), stream.end(), t1,
                                   [](const ImuSample& s, double t) { return s.timestamp < t; });
  if (after_t1 != stream.end() && after_t1->timestamp == t1) {
    out.push_back(*after_t1);
  } else {
    out.push_back(interpolate(*(after_t1 - 1), *after_t1, t1));
  }
  return out;
}

PreintegratedImu preintegrate(std::span<const ImuSample> samples, const ImuBias& bias,
                              const ImuNoise& noise) {
  if (samples.size() < 2) fail("insufficient-points", "preintegration needs >= 2 samples");
  for (size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].timestamp > samples[i - 1].timestamp)) {
      fail("invalid-argument", "IMU timestamps must be strictly increasing");
    }
  }

  PreintegratedImu out;
  out.start_time = samples.front().timestamp;
  out.end_time = samples.back().timestamp;
  out.delta_time = out.end_time - out.start_time;
  out.linearization_bias = bias;
  if (out.delta_time < kMinInterval) fail("invalid-argument", "degenerate IMU interval");

  Mat3& dr = out.delta_rotation;
  Vec3& dv = out.delta_velocity;
  Vec3& dp = out.delta_position;

  for (size_t k = 0; k + 1 < samples.size(); ++k) {
    const double dt = samples[k + 1].timestamp - samples[k].timestamp;
    const Vec3 omega = 0.5 * (samples[k].gyro + samples[k + 1].gyro) - bias.gyro;
    const Vec3 acc_0 = samples[k].accel - bias.accel;
    const Vec3 acc_1 = samples[k + 1].accel - bias.accel;

    const Vec3 rot_vec = omega * dt;
    const Mat3 step = so3_exp(rot_vec);
    const Mat3 jr = so3_right_jacobian(rot_vec);
    const Mat3 dr_next = dr * step;

    const Vec3 acc_mid = 0.5 * (dr * acc_0 + dr_next * acc_1);

    // First-order error propagation, error order (rotation, velocity, position).
    Eigen::Matrix<double, 9, 9> a = Eigen::Matrix<double, 9, 9>::Identity();
    const Mat3 d_acc_d_phi =
        -0.5 * (dr * skew(acc_0) + dr_next * skew(acc_1) * step.transpose());
    a.block<3, 3>(0, 0) = step.transpose();
    a.block<3, 3>(3, 0) = d_acc_d_phi * dt;
    a.block<3, 3>(6, 0) = 0.5 * d_acc_d_phi * dt * dt;
    a.block<3, 3>(6, 3) = Mat3::Identity() * dt;

    Eigen::Matrix<double, 9, 6> b = Eigen::Matrix<double, 9, 6>::Zero();
    b.block<3, 3>(0, 0) = jr * dt;
    b.block<3, 3>(3, 3) = 0.5 * (dr + dr_next) * dt;
    b.block<3, 3>(6, 3) = 0.25 * (dr + dr_next) * dt * dt;

    Eigen::Matrix<double, 6, 6> q = Eigen::Matrix<double, 6, 6>::Zero();
    q.block<3, 3>(0, 0) =
        (noise.gyro_noise_density * noise.gyro_noise_density / dt) * Mat3::Identity();
    q.block<3, 3>(3, 3) =
        (noise.accel_noise_density * noise.accel_noise_density / dt) * Mat3::Identity();

    out.covariance = a * out.covariance * a.transpose() + b * q * b.transpose();

    // Bias Jacobians, accumulated with the same midpoint discretization.
    const Mat3 d_acc_d_bg =
        -0.5 * (dr * skew(acc_0) * out.d_rotation_d_bg +
                dr_next * skew(acc_1) * (step.transpose() * out.d_rotation_d_bg - jr * dt));
    const Mat3 d_acc_d_ba = -0.5 * (dr + dr_next);
    out.d_position_d_bg += out.d_velocity_d_bg * dt + 0.5 * d_acc_d_bg * dt * dt;
    out.d_position_d_ba += out.d_velocity_d_ba * dt + 0.5 * d_acc_d_ba * dt * dt;
    out.d_velocity_d_bg += d_acc_d_bg * dt;
    out.d_velocity_d_ba += d_acc_d_ba * dt;
    out.d_rotation_d_bg = step.transpose() * out.d_rotation_d_bg - jr * dt;

    dp += dv * dt + 0.5 * acc_mid * dt * dt;
    dv += acc_mid * dt;
    dr = dr_next;
  }

  out.covariance += kCovarianceFloor * Mat9::Identity();
  out.covariance = (0.5 * (out.covariance + out.covariance.transpose())).eval();
  return out;
}

Vec9 imu_residual(const FrameState& state_i, const FrameState& state_j,
                  const PreintegratedImu& preint, const Vec3& gravity,
                  ImuResidualJacobians* jacobians) {
  if (preint.delta_time < kMinInterval) fail("invalid-argument", "degenerate IMU interval");
  if (std::abs(state_i.timestamp - preint.start_time) > kTimestampSlack ||
      std::abs(state_j.timestamp - preint.end_time) > kTimestampSlack) {
    fail("timestamp-mismatch", "states do not bracket the preintegrated interval");
  }

  const double dt = preint.delta_time;
  const Vec3 dbg = state_i.bias.gyro - preint.linearization_bias.gyro;
  const Vec3 dba = state_i.bias.accel - preint.linearization_bias.accel;

  const Vec3 rot_correction = preint.d_rotation_d_bg * dbg;
  const Mat3 dr_corrected = preint.delta_rotation * so3_exp(rot_correction);
  const Vec3 dv_corrected =
      preint.delta_velocity + preint.d_velocity_d_bg * dbg + preint.d_velocity_d_ba * dba;
  const Vec3 dp_corrected =
      preint.delta_position + preint.d_position_d_bg * dbg + preint.d_position_d_ba * dba;

  const Mat3 ri_t = state_i.rotation.transpose();
  const Vec3 v_term = ri_t * (state_j.velocity - state_i.velocity - gravity * dt);
  const Vec3 p_term = ri_t * (state_j.position - state_i.position - state_i.velocity * dt -
                              0.5 * gravity * dt * dt);

  Vec9 r;
  const Vec3 r_rot = so3_log(dr_corrected.transpose() * ri_t * state_j.rotation);
  r.segment<3>(0) = r_rot;
  r.segment<3>(3) = v_term - dv_corrected;
  r.segment<3>(6) = p_term - dp_corrected;

  if (jacobians) {
    auto& ji = jacobians->d_state_i;
    auto& jj = jacobians->d_state_j;
    ji.setZero();
    jj.setZero();

    const Mat3 jr_inv = so3_right_jacobian_inverse(r_rot);
    // Rotation block.
    ji.block<3, 3>(0, 0) = -jr_inv * state_j.rotation.transpose() * state_i.rotation;
    jj.block<3, 3>(0, 0) = jr_inv;
    ji.block<3, 3>(0, 9) = -jr_inv * so3_exp(-r_rot) * so3_right_jacobian(rot_correction) *
                           preint.d_rotation_d_bg;
    // Velocity block.
    ji.block<3, 3>(3, 0) = skew(v_term);
    ji.block<3, 3>(3, 6) = -ri_t;
    jj.block<3, 3>(3, 6) = ri_t;
    ji.block<3, 3>(3, 9) = -preint.d_velocity_d_bg;
    ji.block<3, 3>(3, 12) = -preint.d_velocity_d_ba;
    // Position block.
    ji.block<3, 3>(6, 0) = skew(p_term);
    ji.block<3, 3>(6, 3) = -ri_t;
    jj.block<3, 3>(6, 3) = ri_t;
    ji.block<3, 3>(6, 6) = -ri_t * dt;
    ji.block<3, 3>(6, 9) = -preint.d_position_d_bg;
    ji.block<3, 3>(6, 12) = -preint.d_position_d_ba;
  }
  return r;
}

}  // namespace rio
