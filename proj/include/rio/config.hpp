#pragma once

#include <map>
#include <string>

#include "rio/calibration.hpp"
#include "rio/odometry.hpp"
#include "rio/sim.hpp"

namespace rio {

/// Flat `key = value` configuration file with '#' comments. Unknown keys are
/// kept (and readable); typed getters fall back to the built-in defaults.
class Config {
 public:
  Config() = default;
  static Config load(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  double get(const std::string& key, double fallback) const;
  int get(const std::string& key, int fallback) const;
  bool get(const std::string& key, bool fallback) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string get(const std::string& key, const char* fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

/// Every tunable in one place, resolved from a Config.
struct RunParams {
  ChirpConfig chirp;
  AngularPadding padding;
  SpectrumWindowing windowing;
  CfarParams cfar;
  FieldOfView fov;
  RansacParams ransac;
  OdometryParams odometry;
  LogVarClamp clamp;
  Index grid_elevation_bins = 8;
  Index grid_azimuth_bins = 16;
  double grid_fov_azimuth = 60.0 * M_PI / 180.0;
  double grid_fov_elevation = 30.0 * M_PI / 180.0;
  TrajectorySpec trajectory;
  int scene_scatterers = 60;
  double snr_db = 20.0;
  double imu_rate = 100.0;
  FeedNoise feed_noise;
  double velocity_feed_sigma = 0.03;
  double eval_interval = 10.0;
  double eval_max_dt = 0.05;

  static RunParams from_config(const Config& cfg);

  DirectionGrid make_direction_grid() const {
    return make_grid(grid_elevation_bins, grid_azimuth_bins, grid_fov_azimuth,
                     grid_fov_elevation);
  }
};

}  // namespace rio
