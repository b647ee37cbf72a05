#pragma once

#include <fstream>
#include <map>
#include <string>

#include "rio/calibration.hpp"
#include "rio/detect.hpp"
#include "rio/eval.hpp"
#include "rio/sim.hpp"

namespace rio {

// ---- raw IQ frames (binary, magic "RIQ1") ----

struct RiqHeader {
  uint32_t version = 1;
  uint32_t num_chirps = 0;
  uint32_t num_tx = 0;
  uint32_t num_rx = 0;
  uint32_t num_samples = 0;
  double frame_rate = 0;
};

class RiqWriter {
 public:
  RiqWriter(const std::string& path, const RiqHeader& header);
  void append(const RawFrame& frame);

 private:
  std::ofstream out_;
  RiqHeader header_;
};

class RiqReader {
 public:
  explicit RiqReader(const std::string& path);
  const RiqHeader& header() const { return header_; }
  /// Reads the next frame; false at end of file.
  bool next(RawFrame& frame);

 private:
  std::ifstream in_;
  RiqHeader header_;
};

// ---- prediction feed (binary, magic "RPV1") ----

enum class FeedMode : uint8_t { kDirectVelocity = 0, kDopplerImage = 1 };

void write_velocity_feed(const std::string& path, std::span<const VelocityFeedFrame> frames);
void write_doppler_feed(const std::string& path, std::span<const DopplerFeedFrame> frames);

class FeedReader {
 public:
  explicit FeedReader(const std::string& path);
  FeedMode mode() const { return mode_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  bool next_velocity(VelocityFeedFrame& frame);
  bool next_doppler(DopplerFeedFrame& frame);

 private:
  std::ifstream in_;
  FeedMode mode_ = FeedMode::kDirectVelocity;
  Index rows_ = 0;
  Index cols_ = 0;
};

// ---- text formats ----

void write_imu_csv(const std::string& path, std::span<const ImuSample> samples);
std::vector<ImuSample> read_imu_csv(const std::string& path);

void write_tum(const std::string& path, const Trajectory& traj);
Trajectory read_tum(const std::string& path);

void write_pointcloud_csv(std::ostream& out, double timestamp,
                          std::span<const RadarPoint> points);
void write_pointcloud_header(std::ostream& out);

struct TimedVelocity {
  double timestamp = 0;
  Vec3 v = Vec3::Zero();
  Mat3 cov = Mat3::Identity();
};

void write_velocity_csv(const std::string& path, std::span<const TimedVelocity> rows);
std::vector<TimedVelocity> read_velocity_csv(const std::string& path);

/// Body-frame ground-truth velocities, `timestamp,vx,vy,vz`.
void write_body_velocity_csv(const std::string& path, std::span<const TimedVelocity> rows);
std::vector<TimedVelocity> read_body_velocity_csv(const std::string& path);

/// Flat `key = value` report emitter, keys in insertion order.
class KeyValueWriter {
 public:
  void set(const std::string& key, double value);
  void set(const std::string& key, const std::string& value);
  void write(const std::string& path) const;
  void write(std::ostream& out) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

void write_calibration_report(const std::string& path, const CalibrationReport& report);

}  // namespace rio
