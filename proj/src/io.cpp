#include "rio/io.hpp"

#include <cstring>
#include <iomanip>
#include <sstream>

namespace rio {

namespace {

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool read_raw(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return static_cast<bool>(in);
}

void write_magic(std::ostream& out, const char magic[4]) { out.write(magic, 4); }

void expect_magic(std::istream& in, const char magic[4], const std::string& what) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0) fail("io", "bad magic in " + what);
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) fail("io", "cannot open for reading: " + path);
  return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) fail("io", "cannot open for writing: " + path);
  return out;
}

}  // namespace

// ---- RIQ1 ----

RiqWriter::RiqWriter(const std::string& path, const RiqHeader& header)
    : out_(open_out(path, std::ios::binary)), header_(header) {
  write_magic(out_, "RIQ1");
  write_raw(out_, header.version);
  write_raw(out_, header.num_chirps);
  write_raw(out_, header.num_tx);
  write_raw(out_, header.num_rx);
  write_raw(out_, header.num_samples);
  write_raw(out_, header.frame_rate);
}

void RiqWriter::append(const RawFrame& frame) {
  const auto& d = frame.iq.dims();
  if (d[0] != header_.num_chirps || d[1] != header_.num_tx || d[2] != header_.num_rx ||
      d[3] != header_.num_samples) {
    fail("shape-mismatch", "frame shape does not match file header");
  }
  write_raw(out_, frame.timestamp);
  std::vector<float> buf(static_cast<size_t>(frame.iq.size()) * 2);
  const Complex* src = frame.iq.data();
  for (Index i = 0; i < frame.iq.size(); ++i) {
    buf[2 * static_cast<size_t>(i)] = static_cast<float>(src[i].real());
    buf[2 * static_cast<size_t>(i) + 1] = static_cast<float>(src[i].imag());
  }
  out_.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out_) fail("io", "short write on IQ frame");
}

RiqReader::RiqReader(const std::string& path) : in_(open_in(path, std::ios::binary)) {
  expect_magic(in_, "RIQ1", path);
  if (!read_raw(in_, header_.version) || header_.version != 1) {
    fail("io", "unsupported IQ file version");
  }
  read_raw(in_, header_.num_chirps);
  read_raw(in_, header_.num_tx);
  read_raw(in_, header_.num_rx);
  read_raw(in_, header_.num_samples);
  if (!read_raw(in_, header_.frame_rate)) fail("io", "truncated IQ header");
}

bool RiqReader::next(RawFrame& frame) {
  double timestamp;
  if (!read_raw(in_, timestamp)) return false;
  frame.timestamp = timestamp;
  frame.iq = Tensor4<Complex>(header_.num_chirps, header_.num_tx, header_.num_rx,
                              header_.num_samples);
  std::vector<float> buf(static_cast<size_t>(frame.iq.size()) * 2);
  in_.read(reinterpret_cast<char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!in_) fail("io", "truncated IQ frame");
  Complex* dst = frame.iq.data();
  for (Index i = 0; i < frame.iq.size(); ++i) {
    dst[i] = Complex(buf[2 * static_cast<size_t>(i)], buf[2 * static_cast<size_t>(i) + 1]);
  }
  return true;
}

// ---- RPV1 ----

void write_velocity_feed(const std::string& path, std::span<const VelocityFeedFrame> frames) {
  std::ofstream out = open_out(path, std::ios::binary);
  write_magic(out, "RPV1");
  write_raw(out, static_cast<uint8_t>(FeedMode::kDirectVelocity));
  for (const auto& f : frames) {
    write_raw(out, f.timestamp);
    for (int k = 0; k < 3; ++k) write_raw(out, static_cast<float>(f.v[k]));
    for (int k = 0; k < 3; ++k) write_raw(out, static_cast<float>(f.log_variance[k]));
    write_raw(out, static_cast<uint8_t>(f.has_log_variance ? 1 : 0));
  }
}

void write_doppler_feed(const std::string& path, std::span<const DopplerFeedFrame> frames) {
  if (frames.empty()) fail("empty-input", "doppler feed has no frames");
  std::ofstream out = open_out(path, std::ios::binary);
  write_magic(out, "RPV1");
  write_raw(out, static_cast<uint8_t>(FeedMode::kDopplerImage));
  const auto rows = static_cast<uint32_t>(frames.front().image.doppler.rows());
  const auto cols = static_cast<uint32_t>(frames.front().image.doppler.cols());
  write_raw(out, rows);
  write_raw(out, cols);
  for (const auto& f : frames) {
    if (f.image.doppler.rows() != rows || f.image.doppler.cols() != cols) {
      fail("shape-mismatch", "inconsistent doppler image shapes in feed");
    }
    write_raw(out, f.timestamp);
    for (Index e = 0; e < f.image.doppler.rows(); ++e) {
      for (Index a = 0; a < f.image.doppler.cols(); ++a) {
        write_raw(out, static_cast<float>(f.image.doppler(e, a)));
      }
    }
    for (Index e = 0; e < f.image.log_variance.rows(); ++e) {
      for (Index a = 0; a < f.image.log_variance.cols(); ++a) {
        write_raw(out, static_cast<float>(f.image.log_variance(e, a)));
      }
    }
  }
}

FeedReader::FeedReader(const std::string& path) : in_(open_in(path, std::ios::binary)) {
  expect_magic(in_, "RPV1", path);
  uint8_t mode;
  if (!read_raw(in_, mode) || mode > 1) fail("io", "bad feed mode");
  mode_ = static_cast<FeedMode>(mode);
  if (mode_ == FeedMode::kDopplerImage) {
    uint32_t rows, cols;
    read_raw(in_, rows);
    if (!read_raw(in_, cols)) fail("io", "truncated feed header");
    if (rows < 1 || cols < 1) fail("io", "bad feed grid shape");
    rows_ = rows;
    cols_ = cols;
  }
}

bool FeedReader::next_velocity(VelocityFeedFrame& frame) {
  if (mode_ != FeedMode::kDirectVelocity) fail("io", "feed is not in direct-velocity mode");
  if (!read_raw(in_, frame.timestamp)) return false;
  float buf[6];
  for (float& v : buf) {
    if (!read_raw(in_, v)) fail("io", "truncated feed frame");
  }
  uint8_t has_logvar;
  if (!read_raw(in_, has_logvar)) fail("io", "truncated feed frame");
  frame.v = Vec3(buf[0], buf[1], buf[2]);
  frame.log_variance = Vec3(buf[3], buf[4], buf[5]);
  frame.has_log_variance = has_logvar != 0;
  return true;
}

bool FeedReader::next_doppler(DopplerFeedFrame& frame) {
  if (mode_ != FeedMode::kDopplerImage) fail("io", "feed is not in doppler-image mode");
  if (!read_raw(in_, frame.timestamp)) return false;
  frame.image.doppler.resize(rows_, cols_);
  frame.image.log_variance.resize(rows_, cols_);
  for (auto* mat : {&frame.image.doppler, &frame.image.log_variance}) {
    for (Index e = 0; e < rows_; ++e) {
      for (Index a = 0; a < cols_; ++a) {
        float v;
        if (!read_raw(in_, v)) fail("io", "truncated feed frame");
        (*mat)(e, a) = v;
      }
    }
  }
  return true;
}

// ---- text formats ----

void write_imu_csv(const std::string& path, std::span<const ImuSample> samples) {
  std::ofstream out = open_out(path);
  out << "timestamp,wx,wy,wz,ax,ay,az\n";
  out << std::setprecision(17);
  for (const auto& s : samples) {
    out << s.timestamp << ',' << s.gyro.x() << ',' << s.gyro.y() << ',' << s.gyro.z() << ','
        << s.accel.x() << ',' << s.accel.y() << ',' << s.accel.z() << '\n';
  }
}

namespace {

std::vector<std::vector<double>> read_csv_rows(const std::string& path, size_t columns) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) {
      continue;  // header or comment
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != columns) fail("io", "bad column count in " + path);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<ImuSample> read_imu_csv(const std::string& path) {
  std::vector<ImuSample> out;
  for (const auto& r : read_csv_rows(path, 7)) {
    out.push_back({r[0], Vec3(r[1], r[2], r[3]), Vec3(r[4], r[5], r[6])});
  }
  return out;
}

void write_tum(const std::string& path, const Trajectory& traj) {
  std::ofstream out = open_out(path);
  out << std::setprecision(17);
  for (const auto& p : traj) {
    const Eigen::Quaterniond q(p.pose.rotation);
    out << p.timestamp << ' ' << p.pose.translation.x() << ' ' << p.pose.translation.y()
        << ' ' << p.pose.translation.z() << ' ' << q.x() << ' ' << q.y() << ' ' << q.z()
        << ' ' << q.w() << '\n';
  }
}

Trajectory read_tum(const std::string& path) {
  std::ifstream in = open_in(path);
  Trajectory traj;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    double t, x, y, z, qx, qy, qz, qw;
    if (!(ss >> t >> x >> y >> z >> qx >> qy >> qz >> qw)) {
      fail("io", "bad TUM line in " + path);
    }
    TimedPose p;
    p.timestamp = t;
    p.pose.translation = Vec3(x, y, z);
    p.pose.rotation = Eigen::Quaterniond(qw, qx, qy, qz).normalized().toRotationMatrix();
    traj.push_back(p);
  }
  if (traj.empty()) fail("io", "empty trajectory file: " + path);
  return traj;
}

void write_pointcloud_header(std::ostream& out) {
  out << "timestamp,x,y,z,doppler,magnitude\n";
}

void write_pointcloud_csv(std::ostream& out, double timestamp,
                          std::span<const RadarPoint> points) {
  out << std::setprecision(17);
  for (const auto& p : points) {
    out << timestamp << ',' << p.position.x() << ',' << p.position.y() << ','
        << p.position.z() << ',' << p.doppler << ',' << p.magnitude << '\n';
  }
}

void write_velocity_csv(const std::string& path, std::span<const TimedVelocity> rows) {
  std::ofstream out = open_out(path);
  out << "timestamp,vx,vy,vz,cxx,cxy,cxz,cyy,cyz,czz\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.timestamp << ',' << r.v.x() << ',' << r.v.y() << ',' << r.v.z() << ','
        << r.cov(0, 0) << ',' << r.cov(0, 1) << ',' << r.cov(0, 2) << ',' << r.cov(1, 1)
        << ',' << r.cov(1, 2) << ',' << r.cov(2, 2) << '\n';
  }
}

std::vector<TimedVelocity> read_velocity_csv(const std::string& path) {
  std::vector<TimedVelocity> out;
  for (const auto& r : read_csv_rows(path, 10)) {
    TimedVelocity v;
    v.timestamp = r[0];
    v.v = Vec3(r[1], r[2], r[3]);
    v.cov << r[4], r[5], r[6], r[5], r[7], r[8], r[6], r[8], r[9];
    out.push_back(v);
  }
  return out;
}

void write_body_velocity_csv(const std::string& path, std::span<const TimedVelocity> rows) {
  std::ofstream out = open_out(path);
  out << "timestamp,vx,vy,vz\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.timestamp << ',' << r.v.x() << ',' << r.v.y() << ',' << r.v.z() << '\n';
  }
}

std::vector<TimedVelocity> read_body_velocity_csv(const std::string& path) {
  std::vector<TimedVelocity> out;
  for (const auto& r : read_csv_rows(path, 4)) {
    TimedVelocity v;
    v.timestamp = r[0];
    v.v = Vec3(r[1], r[2], r[3]);
    out.push_back(v);
  }
  return out;
}

// ---- key-value reports ----

void KeyValueWriter::set(const std::string& key, double value) {
  std::ostringstream ss;
  ss << std::setprecision(17) << value;
  entries_.emplace_back(key, ss.str());
}

void KeyValueWriter::set(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

void KeyValueWriter::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

void KeyValueWriter::write(const std::string& path) const {
  std::ofstream out = open_out(path);
  write(out);
}

void write_calibration_report(const std::string& path, const CalibrationReport& report) {
  KeyValueWriter kv;
  kv.set("mean_nll", report.mean_nll);
  kv.set("count", static_cast<double>(report.count));
  auto emit = [&kv](const std::string& prefix, const ZStats& z) {
    kv.set(prefix + "_z_mean", z.mean);
    kv.set(prefix + "_z_var", z.variance);
    kv.set(prefix + "_frac_z1", z.coverage[0]);
    kv.set(prefix + "_frac_z2", z.coverage[1]);
    kv.set(prefix + "_frac_z3", z.coverage[2]);
  };
  emit("overall", report.overall);
  const char* axis_names[] = {"x", "y", "z"};
  for (size_t k = 0; k < report.per_axis.size() && k < 3; ++k) {
    emit(axis_names[k], report.per_axis[k]);
  }
  kv.write(path);
}

}  // namespace rio
