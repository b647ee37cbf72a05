#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rio/detect.hpp"

namespace rio {

/// Unit direction per (elevation, azimuth) bin, centers uniformly spaced in
/// angle across [-fov, +fov] on each axis.
struct DirectionGrid {
  Eigen::MatrixXd elevation;  // rad, O_E x O_A
  Eigen::MatrixXd azimuth;    // rad, O_E x O_A
  Eigen::MatrixXd directions; // (O_E * O_A) x 3, row-major over (e, a)

  Index rows() const { return elevation.rows(); }
  Index cols() const { return elevation.cols(); }
  Vec3 direction(Index e, Index a) const { return directions.row(e * cols() + a); }
};

DirectionGrid make_grid(Index o_e, Index o_a, double fov_azimuth, double fov_elevation);

/// Forward Doppler projection: output(e, a) = -v . u(e, a).
Eigen::MatrixXd project_velocity(const Vec3& v, const DirectionGrid& grid);

struct DopplerImage {
  Eigen::MatrixXd doppler;       // m/s
  Eigen::MatrixXd log_variance;  // log (m/s)^2
};

enum class VelocitySource { kPointCloud, kDopplerWls, kDirect };

struct VelocityMeasurement {
  double timestamp = 0;
  Vec3 v = Vec3::Zero();        // body frame, m/s
  Mat3 cov = Mat3::Identity();  // symmetric positive definite
  VelocitySource source = VelocitySource::kDirect;
};

/// Relative eigenvalue threshold below which the information matrix is
/// treated as rank deficient.
inline constexpr double kDegenerateEigenvalueRatio = 1e-8;

/// Inverse-variance weighted least squares on a Doppler image. Throws a
/// degenerate-geometry Error when the information matrix is rank deficient.
VelocityMeasurement wls_velocity(const DopplerImage& img, const DirectionGrid& grid,
                                 double timestamp = 0);

struct RansacParams {
  double inlier_threshold = 0.1;  // m/s
  int iterations = 100;
  int min_points = 3;
  uint64_t seed = 0;
  bool enabled = true;  // disabled = plain least squares on all points
};

/// Robust least squares on per-point radial-velocity constraints
/// d_i = -v . (p_i / |p_i|): sample-consensus loop, then WLS on inliers.
VelocityMeasurement pc_velocity(std::span<const RadarPoint> points, const RansacParams& params,
                                double timestamp = 0);

/// Covariance from per-axis log-variance, or the fixed diag(0.01) fallback
/// when the feed carries no uncertainty.
VelocityMeasurement direct_velocity(const Vec3& v, const std::optional<Vec3>& log_variance,
                                    double timestamp = 0);

}  // namespace rio
