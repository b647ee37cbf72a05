#include "rio/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace rio {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("io", "cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail("config", "expected key = value on line " + std::to_string(line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("config", "empty key on line " + std::to_string(line_no));
    cfg.values_[key] = value;
  }
  return cfg;
}

double Config::get(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    fail("config", "key '" + key + "' is not a number: " + it->second);
  }
}

int Config::get(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    fail("config", "key '" + key + "' is not an integer: " + it->second);
  }
}

bool Config::get(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail("config", "key '" + key + "' is not a boolean: " + it->second);
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string Config::get(const std::string& key, const char* fallback) const {
  return get(key, std::string(fallback));
}

RunParams RunParams::from_config(const Config& cfg) {
  RunParams p;
  const double deg = M_PI / 180.0;

  p.chirp.num_chirps = cfg.get("radar.num_chirps", p.chirp.num_chirps);
  p.chirp.num_tx = cfg.get("radar.num_tx", p.chirp.num_tx);
  p.chirp.num_rx = cfg.get("radar.num_rx", p.chirp.num_rx);
  p.chirp.num_samples = cfg.get("radar.num_samples", p.chirp.num_samples);
  p.chirp.range_resolution = cfg.get("radar.range_resolution", p.chirp.range_resolution);
  p.chirp.doppler_resolution =
      cfg.get("radar.doppler_resolution", p.chirp.doppler_resolution);
  p.chirp.max_range = p.chirp.range_resolution * p.chirp.num_samples;
  p.chirp.max_doppler = p.chirp.doppler_resolution * p.chirp.num_chirps / 2.0;
  p.chirp.carrier_wavelength =
      cfg.get("radar.carrier_wavelength", p.chirp.carrier_wavelength);
  p.chirp.antenna_spacing = cfg.get("radar.antenna_spacing", p.chirp.antenna_spacing);
  p.chirp.frame_rate = cfg.get("radar.frame_rate", p.chirp.frame_rate);
  p.chirp.validate();

  p.padding.elevation = cfg.get("pad.elevation", p.padding.elevation);
  p.padding.azimuth = cfg.get("pad.azimuth", p.padding.azimuth);
  p.windowing.hann_range = cfg.get("window.hann_range", p.windowing.hann_range);
  p.windowing.hann_doppler = cfg.get("window.hann_doppler", p.windowing.hann_doppler);

  p.cfar.train_range = cfg.get("cfar.train_range", p.cfar.train_range);
  p.cfar.train_doppler = cfg.get("cfar.train_doppler", p.cfar.train_doppler);
  p.cfar.guard_range = cfg.get("cfar.guard_range", p.cfar.guard_range);
  p.cfar.guard_doppler = cfg.get("cfar.guard_doppler", p.cfar.guard_doppler);
  p.cfar.threshold_scale = cfg.get("cfar.alpha", p.cfar.threshold_scale);

  p.fov.azimuth_half = cfg.get("fov.azimuth_deg", 60.0) * deg;
  p.fov.elevation_half = cfg.get("fov.elevation_deg", 30.0) * deg;

  p.ransac.inlier_threshold = cfg.get("ransac.inlier_threshold", p.ransac.inlier_threshold);
  p.ransac.iterations = cfg.get("ransac.iterations", p.ransac.iterations);
  p.ransac.min_points = cfg.get("ransac.min_points", p.ransac.min_points);
  p.ransac.enabled = cfg.get("ransac.enabled", p.ransac.enabled);

  p.odometry.window_seconds = cfg.get("graph.window_seconds", p.odometry.window_seconds);
  p.odometry.planar = cfg.get("graph.planar", p.odometry.planar);
  p.odometry.robust.huber_delta = cfg.get("graph.huber_delta", p.odometry.robust.huber_delta);
  p.odometry.robust.max_iterations =
      cfg.get("graph.max_iterations", p.odometry.robust.max_iterations);
  p.odometry.robust.tolerance = cfg.get("graph.tolerance", p.odometry.robust.tolerance);
  p.odometry.robust.lambda_init = cfg.get("graph.lambda_init", p.odometry.robust.lambda_init);
  p.odometry.pose_lock_information =
      cfg.get("graph.pose_lock_information", p.odometry.pose_lock_information);
  p.odometry.bias_prior_information =
      cfg.get("graph.bias_prior_information", p.odometry.bias_prior_information);

  p.odometry.noise.gyro_noise_density =
      cfg.get("imu.gyro_noise_density", p.odometry.noise.gyro_noise_density);
  p.odometry.noise.accel_noise_density =
      cfg.get("imu.accel_noise_density", p.odometry.noise.accel_noise_density);
  p.odometry.noise.gyro_bias_walk =
      cfg.get("imu.gyro_bias_walk", p.odometry.noise.gyro_bias_walk);
  p.odometry.noise.accel_bias_walk =
      cfg.get("imu.accel_bias_walk", p.odometry.noise.accel_bias_walk);
  const double g = cfg.get("imu.gravity", 9.80665);
  p.odometry.noise.gravity = Vec3(0, 0, -g);
  if (g < 9.5 || g > 10.1) fail("config", "gravity magnitude outside [9.5, 10.1]");

  p.odometry.extrinsic.lever_arm = cfg.get("extrinsic.lever_arm", false);
  p.odometry.extrinsic.translation =
      Vec3(cfg.get("extrinsic.tx", 0.0), cfg.get("extrinsic.ty", 0.0),
           cfg.get("extrinsic.tz", 0.0));
  p.odometry.extrinsic.rotation =
      (Eigen::AngleAxisd(cfg.get("extrinsic.yaw", 0.0) * deg, Vec3::UnitZ()) *
       Eigen::AngleAxisd(cfg.get("extrinsic.pitch", 0.0) * deg, Vec3::UnitY()) *
       Eigen::AngleAxisd(cfg.get("extrinsic.roll", 0.0) * deg, Vec3::UnitX()))
          .toRotationMatrix();

  p.clamp.lo = cfg.get("calib.clamp_lo", p.clamp.lo);
  p.clamp.hi = cfg.get("calib.clamp_hi", p.clamp.hi);

  p.grid_elevation_bins = cfg.get("grid.elevation_bins", 8);
  p.grid_azimuth_bins = cfg.get("grid.azimuth_bins", 16);
  p.grid_fov_azimuth = cfg.get("grid.fov_azimuth_deg", 60.0) * deg;
  p.grid_fov_elevation = cfg.get("grid.fov_elevation_deg", 30.0) * deg;

  const std::string kind = cfg.get("sim.kind", "forward");
  if (kind == "forward") {
    p.trajectory.kind = TrajectoryKind::kForwardDominant;
  } else if (kind == "lateral") {
    p.trajectory.kind = TrajectoryKind::kLateralDominant;
  } else if (kind == "circle") {
    p.trajectory.kind = TrajectoryKind::kCircle;
  } else if (kind == "from-file") {
    p.trajectory.kind = TrajectoryKind::kFromFile;
  } else {
    fail("config", "unknown sim.kind: " + kind);
  }
  p.trajectory.duration = cfg.get("sim.duration", p.trajectory.duration);
  p.trajectory.speed = cfg.get("sim.speed", p.trajectory.speed);
  p.trajectory.yaw_rate = cfg.get("sim.yaw_rate", p.trajectory.yaw_rate);
  p.trajectory.circle_radius = cfg.get("sim.circle_radius", p.trajectory.circle_radius);
  p.trajectory.frame_rate = p.chirp.frame_rate;
  p.trajectory.file = cfg.get("sim.file", p.trajectory.file);

  p.scene_scatterers = cfg.get("sim.scatterers", p.scene_scatterers);
  p.snr_db = cfg.get("sim.snr_db", p.snr_db);
  p.imu_rate = cfg.get("sim.imu_rate", p.imu_rate);
  p.feed_noise.sigma_min = cfg.get("sim.feed_sigma_min", p.feed_noise.sigma_min);
  p.feed_noise.sigma_max = cfg.get("sim.feed_sigma_max", p.feed_noise.sigma_max);
  p.feed_noise.miscalibration = cfg.get("sim.miscalibration", p.feed_noise.miscalibration);
  p.feed_noise.clip = 1.25 * p.chirp.max_doppler;
  p.velocity_feed_sigma = cfg.get("sim.velocity_feed_sigma", p.velocity_feed_sigma);

  p.eval_interval = cfg.get("eval.interval", p.eval_interval);
  p.eval_max_dt = cfg.get("eval.max_dt", p.eval_max_dt);
  return p;
}

}  // namespace rio
