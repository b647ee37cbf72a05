#pragma once

#include "rio/config.hpp"
#include "rio/io.hpp"
#include "rio/odometry.hpp"

namespace rio {

/// Classical DSP products of one raw frame: detected points and, when the
/// geometry admits one, a point-cloud velocity measurement.
struct DspFrame {
  double timestamp = 0;
  std::vector<RadarPoint> points;
  std::optional<VelocityMeasurement> velocity;
  PointcloudStats stats;
  std::string drop_reason;  // set when velocity is absent
};

/// dc_remove -> range/Doppler FFT -> CFAR -> angle estimation -> robust
/// velocity fit, using the channel-domain fast path.
DspFrame dsp_frame(const RawFrame& frame, const RunParams& params, uint64_t seed = 0);

struct TimedMeasurement {
  double timestamp = 0;
  std::optional<VelocityMeasurement> meas;
};

/// Doppler-image feed frame to a WLS velocity; nullopt when the grid
/// geometry is degenerate for this frame.
std::optional<VelocityMeasurement> doppler_measurement(const DopplerFeedFrame& frame,
                                                       const DirectionGrid& grid);

/// Feeds measurements and bracketed IMU through the sliding window.
Trajectory run_odometry(std::span<const TimedMeasurement> measurements,
                        std::span<const ImuSample> imu, const OdometryParams& params);

/// Calibration of a Doppler-image feed against ground-truth body velocities
/// (nearest truth row within max_dt; others dropped).
CalibrationReport calibrate_doppler_feed(std::span<const DopplerFeedFrame> feed,
                                         const DirectionGrid& grid,
                                         std::span<const TimedVelocity> truth,
                                         const LogVarClamp& clamp, double max_dt = 0.05);

CalibrationReport calibrate_velocity_feed(std::span<const VelocityFeedFrame> feed,
                                          std::span<const TimedVelocity> truth,
                                          const LogVarClamp& clamp, double max_dt = 0.05);

/// Everything sim-gen produces, in memory.
struct SimDataset {
  Truth truth;
  std::vector<ImuSample> imu;
  std::vector<Scatterer> scene;
  std::vector<DopplerFeedFrame> doppler_feed;
  std::vector<VelocityFeedFrame> velocity_feed;
  std::vector<double> frame_times;
  Trajectory truth_poses;               // at radar frame times
  std::vector<TimedVelocity> truth_velocities;  // body frame, at frame times
};

SimDataset generate_dataset(const RunParams& params, uint64_t seed);

/// Raw IQ frame of a generated dataset at frame index k.
RawFrame dataset_iq_frame(const SimDataset& data, const RunParams& params, size_t k,
                          std::mt19937_64& rng);

double snr_to_noise_sigma(double snr_db);

}  // namespace rio
