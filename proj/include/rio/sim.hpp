#pragma once

#include <random>

#include "rio/chirp.hpp"
#include "rio/imu.hpp"
#include "rio/velocity.hpp"

namespace rio {

struct Scatterer {
  Vec3 position = Vec3::Zero();  // world frame
  double reflectivity = 1.0;     // linear amplitude
};

enum class TrajectoryKind { kForwardDominant, kLateralDominant, kCircle, kFromFile };

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::kForwardDominant;
  double duration = 60.0;      // s
  double speed = 0.6;          // m/s cruise
  double yaw_rate = 0.15;      // rad/s wander amplitude
  double circle_radius = 5.0;  // m, circle kind only
  double frame_rate = 20.0;    // Hz, radar frame cadence
  std::string file;            // TUM input, from-file kind only
};

struct TruthState {
  double timestamp = 0;
  Mat3 rotation = Mat3::Identity();  // world <- body
  Vec3 position = Vec3::Zero();
  Vec3 velocity_world = Vec3::Zero();
  Vec3 acceleration_world = Vec3::Zero();
  Vec3 angular_rate_body = Vec3::Zero();
};

/// Dense ground truth with interpolating accessors.
struct Truth {
  std::vector<TruthState> states;
  double rate = 1000.0;

  double start_time() const { return states.front().timestamp; }
  double end_time() const { return states.back().timestamp; }
  TruthState at(double t) const;
  Vec3 body_velocity(double t) const;
};

/// Twice-differentiable planar trajectories sampled densely enough for IMU
/// synthesis. The seed perturbs the wander phases and periods.
Truth gen_trajectory(const TrajectorySpec& spec, uint64_t seed, double rate = 1000.0);

std::vector<ImuSample> gen_imu(const Truth& truth, const ImuNoise& noise, double rate,
                               uint64_t seed, const ImuBias& bias = {});

/// Point-scatterer FMCW forward model: per scatterer a beat tone at the
/// range bin, a Doppler phase ramp across chirps, and steering phases across
/// the virtual array, plus complex white noise of std noise_sigma.
RawFrame gen_iq_frame(std::span<const Scatterer> scatterers, const Pose& pose,
                      const Vec3& body_velocity, const ChirpConfig& cfg, double noise_sigma,
                      std::mt19937_64& rng, double timestamp = 0);

/// Static scatterers scattered around the trajectory's bounding box.
std::vector<Scatterer> gen_scene(const Truth& truth, int count, double max_range,
                                 uint64_t seed);

struct FeedNoise {
  double sigma_min = 0.02;     // m/s, per-bin noise floor
  double sigma_max = 0.08;     // m/s, at the azimuth grid edge
  double miscalibration = 1.0; // written sigma = miscalibration * true sigma
  double clip = 1.5;           // |d_m| bound, m/s
};

struct DopplerFeedFrame {
  double timestamp = 0;
  DopplerImage image;
};

struct VelocityFeedFrame {
  double timestamp = 0;
  Vec3 v = Vec3::Zero();
  Vec3 log_variance = Vec3::Zero();
  bool has_log_variance = true;
};

/// Doppler-image prediction feed: truth projection plus heteroscedastic
/// Gaussian noise, log-variances written alongside (calibrated when
/// miscalibration = 1).
std::vector<DopplerFeedFrame> gen_prediction_feed(const Truth& truth,
                                                  const DirectionGrid& grid,
                                                  const FeedNoise& noise, double frame_rate,
                                                  uint64_t seed);

/// Direct-velocity prediction feed with per-axis noise of std sigma.
std::vector<VelocityFeedFrame> gen_velocity_feed(const Truth& truth, double sigma,
                                                 double miscalibration, double frame_rate,
                                                 uint64_t seed);

}  // namespace rio
