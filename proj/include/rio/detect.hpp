#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "rio/spectrum.hpp"

namespace rio {

struct CfarParams {
  int train_range = 8;
  int train_doppler = 4;
  int guard_range = 4;
  int guard_doppler = 2;
  double threshold_scale = 8.0;  // alpha, linear
};

/// One detection in the radar frame. x forward, y left, z up;
/// doppler positive = receding.
struct RadarPoint {
  Vec3 position = Vec3::Zero();
  double doppler = 0;
  double magnitude = 0;  // noncoherently integrated linear power
};

struct FieldOfView {
  double azimuth_half = 60.0 * M_PI / 180.0;
  double elevation_half = 30.0 * M_PI / 180.0;
};

struct PointcloudStats {
  int detections = 0;
  int invisible_dropped = 0;
  int fov_dropped = 0;
};

/// 2-D cell-averaging CFAR on a range x doppler power map. A cell is
/// detected iff power > alpha * mean over the training annulus (guard cells
/// excluded); border cells use the truncated available annulus.
std::vector<std::pair<Index, Index>> ca_cfar_2d(const Eigen::MatrixXd& rd_map,
                                                const CfarParams& params);

/// Spatial frequency to physical angle, arcsin(psi / (2 pi d_lambda)).
/// nullopt when the argument leaves [-1, 1] (angle not visible).
std::optional<double> bin_to_angle(double psi, double d_lambda);

/// Indices of the maximum-magnitude bin; ties break toward the smallest
/// (elevation, then azimuth) index.
std::pair<Index, Index> aoa_peak(const Eigen::MatrixXcd& image);

/// Noncoherently integrated power per (range, doppler) cell.
Eigen::MatrixXd rd_power_map(const SpectralCube& cube);
Eigen::MatrixXd rd_power_map(const ChannelSpectrum& ch, const AngularPadding& pad);

std::vector<RadarPoint> build_pointcloud(const SpectralCube& cube, const ChirpConfig& cfg,
                                         const CfarParams& cfar, const FieldOfView& fov,
                                         PointcloudStats* stats = nullptr);

/// Channel-domain variant that forms angle images only at detected cells;
/// emits the same points as the cube-based overload.
std::vector<RadarPoint> build_pointcloud(const ChannelSpectrum& ch, const ChirpConfig& cfg,
                                         const AngularPadding& pad, const CfarParams& cfar,
                                         const FieldOfView& fov, PointcloudStats* stats = nullptr);

}  // namespace rio
