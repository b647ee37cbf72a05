#include "rio/detect.hpp"

#include <cmath>

namespace rio {

namespace {

/// Inclusive-rectangle sums via a summed-area table; S(i, j) holds the sum
/// over rows < i, cols < j.
Eigen::MatrixXd summed_area(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m.rows() + 1, m.cols() + 1);
  for (Index i = 0; i < m.rows(); ++i) {
    double row_sum = 0;
    for (Index j = 0; j < m.cols(); ++j) {
      row_sum += m(i, j);
      s(i + 1, j + 1) = s(i, j + 1) + row_sum;
    }
  }
  return s;
}

struct RectSum {
  const Eigen::MatrixXd& table;
  Index rows, cols;

  /// Sum and cell count of [r0, r1] x [c0, c1] clipped to the map.
  std::pair<double, Index> operator()(Index r0, Index r1, Index c0, Index c1) const {
    r0 = std::max<Index>(r0, 0);
    c0 = std::max<Index>(c0, 0);
    r1 = std::min(r1, rows - 1);
    c1 = std::min(c1, cols - 1);
    if (r0 > r1 || c0 > c1) return {0.0, 0};
    const double sum =
        table(r1 + 1, c1 + 1) - table(r0, c1 + 1) - table(r1 + 1, c0) + table(r0, c0);
    return {sum, (r1 - r0 + 1) * (c1 - c0 + 1)};
  }
};

Vec3 spherical_to_cartesian(double range, double azimuth, double elevation) {
  return {range * std::cos(elevation) * std::cos(azimuth),
          range * std::cos(elevation) * std::sin(azimuth), range * std::sin(elevation)};
}

}  // namespace

std::vector<std::pair<Index, Index>> ca_cfar_2d(const Eigen::MatrixXd& rd_map,
                                                const CfarParams& params) {
  if (params.train_range < 1 || params.train_doppler < 1 || params.guard_range < 0 ||
      params.guard_doppler < 0 || params.threshold_scale <= 0) {
    fail("config", "invalid CFAR parameters");
  }
  const Index rows = rd_map.rows();
  const Index cols = rd_map.cols();
  const Index win_r = params.guard_range + params.train_range;
  const Index win_d = params.guard_doppler + params.train_doppler;
  if (2 * win_r + 1 > rows || 2 * win_d + 1 > cols) {
    fail("config", "CFAR window larger than map");
  }

  const Eigen::MatrixXd table = summed_area(rd_map);
  const RectSum rect{table, rows, cols};

  std::vector<std::pair<Index, Index>> detections;
  for (Index r = 0; r < rows; ++r) {
    for (Index d = 0; d < cols; ++d) {
      const auto [outer_sum, outer_count] = rect(r - win_r, r + win_r, d - win_d, d + win_d);
      const auto [guard_sum, guard_count] =
          rect(r - params.guard_range, r + params.guard_range, d - params.guard_doppler,
               d + params.guard_doppler);
      const Index train_count = outer_count - guard_count;
      if (train_count <= 0) continue;
      const double noise = (outer_sum - guard_sum) / static_cast<double>(train_count);
      if (rd_map(r, d) > params.threshold_scale * noise) {
        detections.emplace_back(r, d);
      }
    }
  }
  return detections;
}

std::optional<double> bin_to_angle(double psi, double d_lambda) {
  const double arg = psi / (2.0 * M_PI * d_lambda);
  if (arg < -1.0 || arg > 1.0) return std::nullopt;
  return std::asin(arg);
}

std::pair<Index, Index> aoa_peak(const Eigen::MatrixXcd& image) {
  if (image.size() == 0) fail("empty-input", "empty angle image");
  Index best_e = 0, best_a = 0;
  double best = -1.0;
  for (Index e = 0; e < image.rows(); ++e) {
    for (Index a = 0; a < image.cols(); ++a) {
      const double mag = std::abs(image(e, a));
      if (mag > best) {
        best = mag;
        best_e = e;
        best_a = a;
      }
    }
  }
  return {best_e, best_a};
}

Eigen::MatrixXd rd_power_map(const SpectralCube& cube) {
  const auto& dims = cube.bins.dims();
  Eigen::MatrixXd map = Eigen::MatrixXd::Zero(dims[3], dims[0]);
  for (Index d = 0; d < dims[0]; ++d) {
    for (Index e = 0; e < dims[1]; ++e) {
      for (Index a = 0; a < dims[2]; ++a) {
        for (Index r = 0; r < dims[3]; ++r) {
          map(r, d) += std::norm(cube.bins(d, e, a, r));
        }
      }
    }
  }
  return map;
}

Eigen::MatrixXd rd_power_map(const ChannelSpectrum& ch, const AngularPadding& pad) {
  const auto& dims = ch.bins.dims();
  // Parseval: the zero-padded angle FFTs scale channel power by pad size,
  // so this matches the cube-based map exactly.
  const double scale = static_cast<double>(pad.elevation) * static_cast<double>(pad.azimuth);
  Eigen::MatrixXd map = Eigen::MatrixXd::Zero(dims[3], dims[0]);
  for (Index d = 0; d < dims[0]; ++d) {
    for (Index tx = 0; tx < dims[1]; ++tx) {
      for (Index rx = 0; rx < dims[2]; ++rx) {
        for (Index r = 0; r < dims[3]; ++r) {
          map(r, d) += scale * std::norm(ch.bins(d, tx, rx, r));
        }
      }
    }
  }
  return map;
}

namespace {

/// Shared tail of both build_pointcloud overloads: angles, FoV gate,
/// spherical-to-Cartesian conversion.
template <typename AngleImageFn>
std::vector<RadarPoint> detections_to_points(
    const std::vector<std::pair<Index, Index>>& detections, const Eigen::MatrixXd& rd_map,
    const CubeAxes& axes, const FieldOfView& fov, AngleImageFn&& image_at,
    PointcloudStats* stats) {
  PointcloudStats local;
  local.detections = static_cast<int>(detections.size());

  std::vector<RadarPoint> points;
  points.reserve(detections.size());
  for (const auto& [r, d] : detections) {
    const Eigen::MatrixXcd img = image_at(d, r);
    const auto [e_bin, a_bin] = aoa_peak(img);
    const auto elevation = bin_to_angle(axes.psi_elevation(e_bin), axes.antenna_spacing);
    const auto azimuth = bin_to_angle(axes.psi_azimuth(a_bin), axes.antenna_spacing);
    if (!elevation || !azimuth) {
      ++local.invisible_dropped;
      continue;
    }
    if (std::abs(*azimuth) > fov.azimuth_half || std::abs(*elevation) > fov.elevation_half) {
      ++local.fov_dropped;
      continue;
    }
    RadarPoint p;
    p.position = spherical_to_cartesian(axes.range(r), *azimuth, *elevation);
    p.doppler = axes.doppler(d);
    p.magnitude = rd_map(r, d);
    points.push_back(p);
  }
  if (stats) *stats = local;
  return points;
}

}  // namespace

std::vector<RadarPoint> build_pointcloud(const SpectralCube& cube, const ChirpConfig& cfg,
                                         const CfarParams& cfar, const FieldOfView& fov,
                                         PointcloudStats* stats) {
  (void)cfg;
  const Eigen::MatrixXd rd_map = rd_power_map(cube);
  const auto detections = ca_cfar_2d(rd_map, cfar);
  const auto& dims = cube.bins.dims();
  auto image_at = [&](Index d, Index r) {
    Eigen::MatrixXcd img(dims[1], dims[2]);
    for (Index e = 0; e < dims[1]; ++e) {
      for (Index a = 0; a < dims[2]; ++a) img(e, a) = cube.bins(d, e, a, r);
    }
    return img;
  };
  return detections_to_points(detections, rd_map, cube.axes, fov, image_at, stats);
}

std::vector<RadarPoint> build_pointcloud(const ChannelSpectrum& ch, const ChirpConfig& cfg,
                                         const AngularPadding& pad, const CfarParams& cfar,
                                         const FieldOfView& fov, PointcloudStats* stats) {
  const Eigen::MatrixXd rd_map = rd_power_map(ch, pad);
  const auto detections = ca_cfar_2d(rd_map, cfar);
  const CubeAxes axes{ch.bins.dim(0),         pad.elevation,        pad.azimuth,
                      ch.bins.dim(3),         cfg.doppler_resolution, cfg.range_resolution,
                      cfg.antenna_spacing};
  auto image_at = [&](Index d, Index r) { return angle_image(ch, cfg, pad, d, r); };
  return detections_to_points(detections, rd_map, axes, fov, image_at, stats);
}

}  // namespace rio
