#include "rio/odometry.hpp"

namespace rio {

void Odometry::add_frame(double timestamp, const std::optional<VelocityMeasurement>& meas,
                         std::span<const ImuSample> imu_bracket) {
  if (!window_.states.empty() && !(timestamp > window_.states.back().timestamp)) {
    fail("invalid-argument", "frames must arrive in strictly increasing time order");
  }
  if (!meas) ++dropped_measurements_;

  if (window_.states.empty()) {
    // Bootstrap: first pose fixed to identity, first velocity taken from the
    // first radar velocity measurement.
    FrameState s0;
    s0.timestamp = timestamp;
    if (meas) s0.velocity = window_.extrinsic.rotation * meas->v;
    window_.states.push_back(s0);
    window_.pose_prior = {s0.rotation, s0.position, params_.pose_lock_information};
    window_.bias_prior = {ImuBias{}, params_.bias_prior_information};
    if (meas) window_.velocity_factors.push_back({*meas, 0, {}});
    return;
  }

  const FrameState& prev = window_.states.back();
  ImuFactor factor;
  factor.preint = preintegrate(imu_bracket, prev.bias, params_.noise);
  factor.i = static_cast<Index>(window_.states.size()) - 1;
  factor.j = factor.i + 1;

  // Initialize the new state by propagating the previous one.
  const double dt = factor.preint.delta_time;
  FrameState next;
  next.timestamp = timestamp;
  next.rotation = prev.rotation * factor.preint.delta_rotation;
  next.velocity = prev.velocity + params_.noise.gravity * dt +
                  prev.rotation * factor.preint.delta_velocity;
  next.position = prev.position + prev.velocity * dt +
                  0.5 * params_.noise.gravity * dt * dt +
                  prev.rotation * factor.preint.delta_position;
  next.bias = prev.bias;

  window_.states.push_back(next);
  window_.imu_factors.push_back(std::move(factor));
  if (meas) {
    VelocityFactor vf;
    vf.meas = *meas;
    vf.state = static_cast<Index>(window_.states.size()) - 1;
    if (window_.extrinsic.lever_arm && !imu_bracket.empty()) {
      vf.body_angular_rate = imu_bracket.back().gyro;
    }
    window_.velocity_factors.push_back(std::move(vf));
  }

  optimize(window_, params_.robust);
  if (marginalize(window_, params_.window_seconds, &finished_) > 0 && params_.planar) {
    planar_project(window_);
  }
}

Trajectory Odometry::trajectory() const {
  Trajectory out;
  out.reserve(finished_.size() + window_.states.size());
  for (const auto& s : finished_) out.push_back({s.timestamp, {s.rotation, s.position}});
  for (const auto& s : window_.states) out.push_back({s.timestamp, {s.rotation, s.position}});
  return out;
}

}  // namespace rio
