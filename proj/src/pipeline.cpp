#include "rio/pipeline.hpp"

#include <algorithm>

namespace rio {

DspFrame dsp_frame(const RawFrame& frame, const RunParams& params, uint64_t seed) {
  DspFrame out;
  out.timestamp = frame.timestamp;

  const RawFrame cleaned = dc_remove(frame);
  const ChannelSpectrum ch = range_doppler_fft(cleaned, params.chirp, params.windowing);
  out.points = build_pointcloud(ch, params.chirp, params.padding, params.cfar, params.fov,
                                &out.stats);

  RansacParams ransac = params.ransac;
  ransac.seed = seed;
  try {
    out.velocity = pc_velocity(out.points, ransac, frame.timestamp);
  } catch (const Error& e) {
    out.drop_reason = e.category();
  }
  return out;
}

std::optional<VelocityMeasurement> doppler_measurement(const DopplerFeedFrame& frame,
                                                       const DirectionGrid& grid) {
  try {
    return wls_velocity(frame.image, grid, frame.timestamp);
  } catch (const Error&) {
    return std::nullopt;
  }
}

Trajectory run_odometry(std::span<const TimedMeasurement> measurements,
                        std::span<const ImuSample> imu, const OdometryParams& params) {
  if (measurements.empty()) fail("empty-input", "no measurements to fuse");
  Odometry odo(params);
  double prev_time = 0;
  bool first = true;
  for (const auto& m : measurements) {
    if (first) {
      odo.add_frame(m.timestamp, m.meas, {});
      first = false;
    } else {
      const std::vector<ImuSample> bracket = slice_interval(imu, prev_time, m.timestamp);
      odo.add_frame(m.timestamp, m.meas, bracket);
    }
    prev_time = m.timestamp;
  }
  return odo.trajectory();
}

namespace {

/// Index of the nearest truth row, or npos when outside max_dt.
size_t nearest_truth(std::span<const TimedVelocity> truth, double t, double max_dt) {
  const auto it = std::lower_bound(
      truth.begin(), truth.end(), t,
      [](const TimedVelocity& v, double time) { return v.timestamp < time; });
  size_t best = truth.size();
  double best_dt = max_dt;
  for (const auto* cand : {it == truth.begin() ? nullptr : &*(it - 1),
                           it == truth.end() ? nullptr : &*it}) {
    if (!cand) continue;
    const double dt = std::abs(cand->timestamp - t);
    if (dt <= best_dt) {
      best_dt = dt;
      best = static_cast<size_t>(cand - truth.data());
    }
  }
  return best;
}

}  // namespace

CalibrationReport calibrate_doppler_feed(std::span<const DopplerFeedFrame> feed,
                                         const DirectionGrid& grid,
                                         std::span<const TimedVelocity> truth,
                                         const LogVarClamp& clamp, double max_dt) {
  std::vector<double> est, gt, logvar;
  std::vector<std::pair<double, double>> errors;
  for (const auto& frame : feed) {
    const size_t k = nearest_truth(truth, frame.timestamp, max_dt);
    if (k == truth.size()) continue;
    const Eigen::MatrixXd projected = project_velocity(truth[k].v, grid);
    for (Index e = 0; e < grid.rows(); ++e) {
      for (Index a = 0; a < grid.cols(); ++a) {
        est.push_back(frame.image.doppler(e, a));
        gt.push_back(projected(e, a));
        const double lv = std::clamp(frame.image.log_variance(e, a), clamp.lo, clamp.hi);
        logvar.push_back(lv);
        errors.emplace_back(frame.image.doppler(e, a) - projected(e, a),
                            std::exp(0.5 * lv));
      }
    }
  }
  if (est.empty()) fail("zero-pairs", "no feed frames matched the ground truth");

  CalibrationReport report;
  report.count = est.size();
  report.mean_nll = nll(est, gt, logvar, clamp);
  report.overall = z_stats(errors);
  return report;
}

CalibrationReport calibrate_velocity_feed(std::span<const VelocityFeedFrame> feed,
                                          std::span<const TimedVelocity> truth,
                                          const LogVarClamp& clamp, double max_dt) {
  std::vector<double> est, gt, logvar;
  std::vector<std::pair<double, double>> errors;
  std::array<std::vector<std::pair<double, double>>, 3> axis_errors;
  for (const auto& frame : feed) {
    const size_t k = nearest_truth(truth, frame.timestamp, max_dt);
    if (k == truth.size()) continue;
    const Vec3 lv_raw =
        frame.has_log_variance ? frame.log_variance : Vec3::Constant(std::log(0.01));
    for (int axis = 0; axis < 3; ++axis) {
      est.push_back(frame.v[axis]);
      gt.push_back(truth[k].v[axis]);
      const double lv = std::clamp(lv_raw[axis], clamp.lo, clamp.hi);
      logvar.push_back(lv);
      const auto err = std::make_pair(frame.v[axis] - truth[k].v[axis], std::exp(0.5 * lv));
      errors.push_back(err);
      axis_errors[static_cast<size_t>(axis)].push_back(err);
    }
  }
  if (est.empty()) fail("zero-pairs", "no feed frames matched the ground truth");

  CalibrationReport report;
  report.count = est.size();
  report.mean_nll = nll(est, gt, logvar, clamp);
  report.overall = z_stats(errors);
  for (const auto& ax : axis_errors) report.per_axis.push_back(z_stats(ax));
  return report;
}

double snr_to_noise_sigma(double snr_db) { return std::pow(10.0, -snr_db / 20.0); }

SimDataset generate_dataset(const RunParams& params, uint64_t seed) {
  SimDataset data;
  data.truth = gen_trajectory(params.trajectory, seed);
  data.imu = gen_imu(data.truth, params.odometry.noise, params.imu_rate, seed + 1);
  data.scene = gen_scene(data.truth, params.scene_scatterers, params.chirp.max_range,
                         seed + 2);
  const DirectionGrid grid = params.make_direction_grid();
  data.doppler_feed = gen_prediction_feed(data.truth, grid, params.feed_noise,
                                          params.trajectory.frame_rate, seed + 3);
  data.velocity_feed =
      gen_velocity_feed(data.truth, params.velocity_feed_sigma,
                        params.feed_noise.miscalibration, params.trajectory.frame_rate,
                        seed + 4);

  const double t0 = data.truth.start_time();
  // Frames stop half a period short of the truth span so IMU bracketing
  // always has samples beyond the last frame.
  const double t_end = data.truth.end_time() - 0.5 / params.trajectory.frame_rate;
  for (double t = t0; t <= t_end; t += 1.0 / params.trajectory.frame_rate) {
    data.frame_times.push_back(t);
    const TruthState s = data.truth.at(t);
    data.truth_poses.push_back({t, {s.rotation, s.position}});
    data.truth_velocities.push_back({t, data.truth.body_velocity(t), Mat3::Identity()});
  }
  return data;
}

RawFrame dataset_iq_frame(const SimDataset& data, const RunParams& params, size_t k,
                          std::mt19937_64& rng) {
  const double t = data.frame_times.at(k);
  const TruthState s = data.truth.at(t);
  return gen_iq_frame(data.scene, Pose{s.rotation, s.position},
                      s.rotation.transpose() * s.velocity_world, params.chirp,
                      snr_to_noise_sigma(params.snr_db), rng, t);
}

}  // namespace rio
