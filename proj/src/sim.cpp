#include "rio/sim.hpp"

#include <algorithm>
#include <fstream>

namespace rio {

namespace {

/// Analytic planar motion model: body velocity, its time derivative, and
/// yaw rate as closed-form functions of time.
struct PlanarModel {
  TrajectoryKind kind;
  double speed = 0.6;
  double yaw_amp = 0.15;
  double circle_radius = 5.0;
  double ramp_time = 2.0;
  double yaw_period = 15.0;
  double yaw_phase = 0.0;
  double sway_period = 8.0;
  double sway_ratio = 0.15;

  double ramp(double t) const {
    if (kind == TrajectoryKind::kCircle) return 1.0;
    if (t >= ramp_time) return 1.0;
    return 0.5 * (1.0 - std::cos(M_PI * t / ramp_time));
  }
  double ramp_dot(double t) const {
    if (kind == TrajectoryKind::kCircle || t >= ramp_time) return 0.0;
    return 0.5 * M_PI / ramp_time * std::sin(M_PI * t / ramp_time);
  }

  double yaw_rate(double t) const {
    if (kind == TrajectoryKind::kCircle) return speed / circle_radius;
    return yaw_amp * std::sin(2.0 * M_PI * t / yaw_period + yaw_phase);
  }
  double yaw(double t) const {
    if (kind == TrajectoryKind::kCircle) return speed / circle_radius * t;
    const double w = 2.0 * M_PI / yaw_period;
    return -yaw_amp / w * (std::cos(w * t + yaw_phase) - std::cos(yaw_phase));
  }

  Vec3 body_velocity(double t) const {
    const double s = speed * ramp(t);
    switch (kind) {
      case TrajectoryKind::kCircle:
        return {speed, 0, 0};
      case TrajectoryKind::kLateralDominant:
        return {sway_ratio * s * std::sin(2.0 * M_PI * t / sway_period), s, 0};
      default:
        return {s, sway_ratio * s * std::sin(2.0 * M_PI * t / sway_period), 0};
    }
  }
  Vec3 body_velocity_dot(double t) const {
    const double s = speed * ramp(t);
    const double sd = speed * ramp_dot(t);
    const double w = 2.0 * M_PI / sway_period;
    const double sway = std::sin(w * t);
    const double sway_d = w * std::cos(w * t);
    switch (kind) {
      case TrajectoryKind::kCircle:
        return Vec3::Zero();
      case TrajectoryKind::kLateralDominant:
        return {sway_ratio * (sd * sway + s * sway_d), sd, 0};
      default:
        return {sd, sway_ratio * (sd * sway + s * sway_d), 0};
    }
  }
};

TruthState sample_model(const PlanarModel& model, double t) {
  TruthState s;
  s.timestamp = t;
  const double psi = model.yaw(t);
  const double psi_dot = model.yaw_rate(t);
  s.rotation = rot_z(psi);
  const Vec3 vb = model.body_velocity(t);
  s.velocity_world = s.rotation * vb;
  s.acceleration_world =
      s.rotation * (psi_dot * Vec3::UnitZ().cross(vb) + model.body_velocity_dot(t));
  s.angular_rate_body = Vec3(0, 0, psi_dot);
  return s;
}

Truth truth_from_tum(const std::string& path, double frame_rate);

Vec3 lerp(const Vec3& a, const Vec3& b, double w) { return a + w * (b - a); }

}  // namespace

TruthState Truth::at(double t) const {
  if (states.empty()) fail("empty-input", "truth has no states");
  if (t <= states.front().timestamp) return states.front();
  if (t >= states.back().timestamp) return states.back();
  const auto it = std::lower_bound(
      states.begin(), states.end(), t,
      [](const TruthState& s, double time) { return s.timestamp < time; });
  const TruthState& b = *it;
  const TruthState& a = *(it - 1);
  const double w = (t - a.timestamp) / (b.timestamp - a.timestamp);
  TruthState out;
  out.timestamp = t;
  out.position = lerp(a.position, b.position, w);
  out.velocity_world = lerp(a.velocity_world, b.velocity_world, w);
  out.acceleration_world = lerp(a.acceleration_world, b.acceleration_world, w);
  out.angular_rate_body = lerp(a.angular_rate_body, b.angular_rate_body, w);
  out.rotation = a.rotation * so3_exp(w * so3_log(a.rotation.transpose() * b.rotation));
  return out;
}

Vec3 Truth::body_velocity(double t) const {
  const TruthState s = at(t);
  return s.rotation.transpose() * s.velocity_world;
}

Truth gen_trajectory(const TrajectorySpec& spec, uint64_t seed, double rate) {
  if (spec.duration <= 0) fail("config", "trajectory duration must be positive");
  if (spec.kind == TrajectoryKind::kFromFile) {
    return truth_from_tum(spec.file, rate);
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  PlanarModel model;
  model.kind = spec.kind;
  model.speed = spec.speed;
  model.yaw_amp = spec.yaw_rate;
  model.circle_radius = spec.circle_radius;
  model.yaw_period = 12.0 + 6.0 * uni(rng);
  model.yaw_phase = 2.0 * M_PI * uni(rng);
  model.sway_period = 7.0 + 4.0 * uni(rng);

  Truth truth;
  truth.rate = rate;
  const auto n = static_cast<size_t>(std::llround(spec.duration * rate)) + 1;
  truth.states.reserve(n);

  Vec3 position = Vec3::Zero();
  const double dt = 1.0 / rate;
  for (size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    TruthState s = sample_model(model, t);
    s.position = position;
    truth.states.push_back(s);
    // Simpson's rule on the analytic velocity.
    const Vec3 v0 = s.velocity_world;
    const Vec3 v1 = sample_model(model, t + 0.5 * dt).velocity_world;
    const Vec3 v2 = sample_model(model, t + dt).velocity_world;
    position += dt / 6.0 * (v0 + 4.0 * v1 + v2);
  }
  return truth;
}

std::vector<ImuSample> gen_imu(const Truth& truth, const ImuNoise& noise, double rate,
                               uint64_t seed, const ImuBias& bias) {
  if (truth.rate < 5.0 * rate) {
    fail("config", "truth sampling must be at least 5x the IMU rate");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Discrete noise std = density * sqrt(rate).
  const double sg = noise.gyro_noise_density * std::sqrt(rate);
  const double sa = noise.accel_noise_density * std::sqrt(rate);

  std::vector<ImuSample> out;
  const double t0 = truth.start_time();
  const auto n = static_cast<size_t>(std::floor((truth.end_time() - t0) * rate)) + 1;
  out.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) / rate;
    const TruthState s = truth.at(t);
    ImuSample sample;
    sample.timestamp = t;
    sample.gyro = s.angular_rate_body + bias.gyro +
                  sg * Vec3(gauss(rng), gauss(rng), gauss(rng));
    sample.accel = s.rotation.transpose() * (s.acceleration_world - noise.gravity) +
                   bias.accel + sa * Vec3(gauss(rng), gauss(rng), gauss(rng));
    out.push_back(sample);
  }
  return out;
}

RawFrame gen_iq_frame(std::span<const Scatterer> scatterers, const Pose& pose,
                      const Vec3& body_velocity, const ChirpConfig& cfg, double noise_sigma,
                      std::mt19937_64& rng, double timestamp) {
  RawFrame frame;
  frame.timestamp = timestamp;
  frame.iq = Tensor4<Complex>(cfg.num_chirps, cfg.num_tx, cfg.num_rx, cfg.num_samples);
  frame.iq.setZero();

  const int channels = cfg.num_channels();
  std::vector<Complex> chirp_phasor(static_cast<size_t>(cfg.num_chirps));
  std::vector<Complex> sample_phasor(static_cast<size_t>(cfg.num_samples));
  std::vector<Complex> channel_phasor(static_cast<size_t>(channels));

  for (const Scatterer& sc : scatterers) {
    const Vec3 p = pose.inverse() * sc.position;
    const double range = p.norm();
    // Visibility cull: behind the array or outside the modeled aperture.
    if (range < 2.0 * cfg.range_resolution || range > 0.97 * cfg.max_range) continue;
    const double azimuth = std::atan2(p.y(), p.x());
    const double elevation = std::asin(std::clamp(p.z() / range, -1.0, 1.0));
    if (std::abs(azimuth) > 75.0 * M_PI / 180.0 ||
        std::abs(elevation) > 40.0 * M_PI / 180.0) {
      continue;
    }
    const double doppler = -body_velocity.dot(p / range);

    const double f_range = range / (cfg.range_resolution * cfg.num_samples);
    const double f_doppler = doppler / (cfg.doppler_resolution * cfg.num_chirps);
    const Complex step_range = std::polar(1.0, 2.0 * M_PI * f_range);
    const Complex step_doppler = std::polar(1.0, 2.0 * M_PI * f_doppler);

    Complex acc(1.0, 0.0);
    for (int n = 0; n < cfg.num_chirps; ++n, acc *= step_doppler) {
      chirp_phasor[static_cast<size_t>(n)] = acc;
    }
    acc = Complex(sc.reflectivity, 0.0);
    for (int m = 0; m < cfg.num_samples; ++m, acc *= step_range) {
      sample_phasor[static_cast<size_t>(m)] = acc;
    }
    const double sin_az = std::sin(azimuth);
    const double sin_el = std::sin(elevation);
    for (int tx = 0; tx < cfg.num_tx; ++tx) {
      for (int rx = 0; rx < cfg.num_rx; ++rx) {
        const VirtualElement& e = cfg.element(tx, rx);
        channel_phasor[static_cast<size_t>(tx * cfg.num_rx + rx)] = std::polar(
            1.0, 2.0 * M_PI * cfg.antenna_spacing * (e.col * sin_az + e.row * sin_el));
      }
    }

    for (int n = 0; n < cfg.num_chirps; ++n) {
      for (int tx = 0; tx < cfg.num_tx; ++tx) {
        for (int rx = 0; rx < cfg.num_rx; ++rx) {
          const Complex base =
              chirp_phasor[static_cast<size_t>(n)] *
              channel_phasor[static_cast<size_t>(tx * cfg.num_rx + rx)];
          Complex* dst = &frame.iq(n, tx, rx, 0);
          for (int m = 0; m < cfg.num_samples; ++m) {
            dst[m] += base * sample_phasor[static_cast<size_t>(m)];
          }
        }
      }
    }
  }

  if (noise_sigma > 0) {
    std::normal_distribution<double> gauss(0.0, noise_sigma / std::sqrt(2.0));
    Complex* data = frame.iq.data();
    for (Index i = 0; i < frame.iq.size(); ++i) {
      data[i] += Complex(gauss(rng), gauss(rng));
    }
  }
  return frame;
}

std::vector<Scatterer> gen_scene(const Truth& truth, int count, double max_range,
                                 uint64_t seed) {
  Vec3 lo = truth.states.front().position;
  Vec3 hi = lo;
  for (const auto& s : truth.states) {
    lo = lo.cwiseMin(s.position);
    hi = hi.cwiseMax(s.position);
  }
  const double pad = 0.6 * max_range;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo.x() - pad, hi.x() + pad);
  std::uniform_real_distribution<double> uy(lo.y() - pad, hi.y() + pad);
  std::uniform_real_distribution<double> uz(-0.5, 0.5);
  std::lognormal_distribution<double> amp(0.0, 0.35);

  std::vector<Scatterer> scene(static_cast<size_t>(count));
  for (auto& sc : scene) {
    sc.position = Vec3(ux(rng), uy(rng), uz(rng));
    sc.reflectivity = amp(rng);
  }
  return scene;
}

std::vector<DopplerFeedFrame> gen_prediction_feed(const Truth& truth,
                                                  const DirectionGrid& grid,
                                                  const FeedNoise& noise, double frame_rate,
                                                  uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Per-bin noise scale grows toward the azimuth edges (deterministic
  // heteroscedastic pattern).
  Eigen::MatrixXd sigma(grid.rows(), grid.cols());
  for (Index e = 0; e < grid.rows(); ++e) {
    for (Index a = 0; a < grid.cols(); ++a) {
      const double frac =
          grid.cols() == 1 ? 0.0
                           : std::abs(2.0 * static_cast<double>(a) /
                                          static_cast<double>(grid.cols() - 1) -
                                      1.0);
      sigma(e, a) = noise.sigma_min + (noise.sigma_max - noise.sigma_min) * frac;
    }
  }

  std::vector<DopplerFeedFrame> feed;
  const double t0 = truth.start_time();
  const auto n = static_cast<size_t>(std::floor((truth.end_time() - t0) * frame_rate)) + 1;
  feed.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) / frame_rate;
    DopplerFeedFrame frame;
    frame.timestamp = t;
    frame.image.doppler = project_velocity(truth.body_velocity(t), grid);
    frame.image.log_variance.resize(grid.rows(), grid.cols());
    for (Index e = 0; e < grid.rows(); ++e) {
      for (Index a = 0; a < grid.cols(); ++a) {
        frame.image.doppler(e, a) += sigma(e, a) * gauss(rng);
        frame.image.doppler(e, a) =
            std::clamp(frame.image.doppler(e, a), -noise.clip, noise.clip);
        const double written = noise.miscalibration * sigma(e, a);
        frame.image.log_variance(e, a) = 2.0 * std::log(written);
      }
    }
    feed.push_back(std::move(frame));
  }
  return feed;
}

std::vector<VelocityFeedFrame> gen_velocity_feed(const Truth& truth, double sigma,
                                                 double miscalibration, double frame_rate,
                                                 uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<VelocityFeedFrame> feed;
  const double t0 = truth.start_time();
  const auto n = static_cast<size_t>(std::floor((truth.end_time() - t0) * frame_rate)) + 1;
  feed.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) / frame_rate;
    VelocityFeedFrame frame;
    frame.timestamp = t;
    frame.v = truth.body_velocity(t) + sigma * Vec3(gauss(rng), gauss(rng), gauss(rng));
    const double written = miscalibration * sigma;
    frame.log_variance = Vec3::Constant(2.0 * std::log(std::max(written, 1e-12)));
    feed.push_back(frame);
  }
  return feed;
}

namespace {

Truth truth_from_tum(const std::string& path, double rate) {
  std::ifstream in(path);
  if (!in) fail("io", "cannot open trajectory file: " + path);
  std::vector<TimedPose> poses;
  double t, x, y, z, qx, qy, qz, qw;
  while (in >> t >> x >> y >> z >> qx >> qy >> qz >> qw) {
    TimedPose p;
    p.timestamp = t;
    p.pose.translation = Vec3(x, y, z);
    p.pose.rotation = Eigen::Quaterniond(qw, qx, qy, qz).normalized().toRotationMatrix();
    poses.push_back(p);
  }
  if (poses.size() < 3) fail("io", "trajectory file needs at least 3 poses");

  Truth truth;
  truth.rate = rate;
  truth.states.resize(poses.size());
  for (size_t k = 0; k < poses.size(); ++k) {
    TruthState& s = truth.states[k];
    s.timestamp = poses[k].timestamp;
    s.rotation = poses[k].pose.rotation;
    s.position = poses[k].pose.translation;
    const size_t a = k == 0 ? 0 : k - 1;
    const size_t b = k + 1 == poses.size() ? k : k + 1;
    const double dt = poses[b].timestamp - poses[a].timestamp;
    s.velocity_world = (poses[b].pose.translation - poses[a].pose.translation) / dt;
    s.angular_rate_body =
        so3_log(poses[a].pose.rotation.transpose() * poses[b].pose.rotation) / dt;
  }
  for (size_t k = 0; k < poses.size(); ++k) {
    const size_t a = k == 0 ? 0 : k - 1;
    const size_t b = k + 1 == poses.size() ? k : k + 1;
    const double dt = truth.states[b].timestamp - truth.states[a].timestamp;
    truth.states[k].acceleration_world =
        (truth.states[b].velocity_world - truth.states[a].velocity_world) / dt;
  }
  // File-based truth is typically coarser than generated truth; callers
  // synthesizing IMU from it must provide a sufficiently dense file.
  truth.rate = static_cast<double>(poses.size() - 1) /
               (poses.back().timestamp - poses.front().timestamp);
  return truth;
}

}  // namespace

}  // namespace rio
