#pragma once

#include "rio/graph.hpp"

namespace rio {

struct OdometryParams {
  double window_seconds = 3.0;
  bool planar = true;
  RobustParams robust;
  ImuNoise noise;
  Extrinsic extrinsic;
  double pose_lock_information = 1e12;
  double bias_prior_information = 100.0;
};

/// Sliding-window odometry driver: one instance per trajectory, frames fed
/// strictly in timestamp order.
class Odometry {
 public:
  explicit Odometry(const OdometryParams& params) : params_(params) {
    window_.noise = params.noise;
    window_.extrinsic = params.extrinsic;
    window_.pose_lock_information = params.pose_lock_information;
  }

  /// Adds one radar frame. The measurement may be absent (dropped upstream);
  /// imu_bracket must cover [previous timestamp, timestamp] for every frame
  /// after the first.
  void add_frame(double timestamp, const std::optional<VelocityMeasurement>& meas,
                 std::span<const ImuSample> imu_bracket);

  const Window& window() const { return window_; }

  /// Poses marginalized out so far plus the current window, in time order.
  Trajectory trajectory() const;

  int dropped_measurements() const { return dropped_measurements_; }

 private:
  OdometryParams params_;
  Window window_;
  std::vector<FrameState> finished_;
  int dropped_measurements_ = 0;
};

}  // namespace rio
