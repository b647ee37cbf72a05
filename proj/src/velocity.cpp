#include "rio/velocity.hpp"

#include <numeric>
#include <random>

namespace rio {

namespace {

Eigen::VectorXd linspace_centered(Index n, double half_span) {
  Eigen::VectorXd v(n);
  if (n == 1) {
    v[0] = 0.0;
    return v;
  }
  for (Index i = 0; i < n; ++i) {
    v[i] = -half_span + 2.0 * half_span * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

/// Solves the weighted normal equations for D v = d and gates on the
/// conditioning of the information matrix.
struct WlsSolution {
  Vec3 v;
  Mat3 information;
  Mat3 covariance;
};

WlsSolution solve_weighted(const Eigen::MatrixXd& design, const Eigen::VectorXd& rhs,
                           const Eigen::VectorXd& weights) {
  const Mat3 info = design.transpose() * weights.asDiagonal() * design;
  Eigen::SelfAdjointEigenSolver<Mat3> eig(info);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > kDegenerateEigenvalueRatio * hi)) {
    fail("degenerate-geometry", "velocity information matrix is rank deficient");
  }
  WlsSolution sol;
  Eigen::LLT<Mat3> llt(info);
  sol.v = llt.solve(design.transpose() * (weights.asDiagonal() * rhs));
  sol.information = info;
  sol.covariance = llt.solve(Mat3::Identity());
  // Symmetrize away factorization round-off.
  sol.covariance = 0.5 * (sol.covariance + sol.covariance.transpose()).eval();
  return sol;
}

}  // namespace

DirectionGrid make_grid(Index o_e, Index o_a, double fov_azimuth, double fov_elevation) {
  if (o_e < 1 || o_a < 1) fail("config", "grid bin counts must be >= 1");
  DirectionGrid grid;
  grid.elevation.resize(o_e, o_a);
  grid.azimuth.resize(o_e, o_a);
  grid.directions.resize(o_e * o_a, 3);
  const Eigen::VectorXd els = linspace_centered(o_e, fov_elevation);
  const Eigen::VectorXd azs = linspace_centered(o_a, fov_azimuth);
  for (Index e = 0; e < o_e; ++e) {
    for (Index a = 0; a < o_a; ++a) {
      grid.elevation(e, a) = els[e];
      grid.azimuth(e, a) = azs[a];
      const double ce = std::cos(els[e]);
      grid.directions.row(e * o_a + a) =
          Vec3(ce * std::cos(azs[a]), ce * std::sin(azs[a]), std::sin(els[e]));
    }
  }
  return grid;
}

Eigen::MatrixXd project_velocity(const Vec3& v, const DirectionGrid& grid) {
  Eigen::MatrixXd out(grid.rows(), grid.cols());
  for (Index e = 0; e < grid.rows(); ++e) {
    for (Index a = 0; a < grid.cols(); ++a) {
      out(e, a) = -v.dot(grid.direction(e, a));
    }
  }
  return out;
}

VelocityMeasurement wls_velocity(const DopplerImage& img, const DirectionGrid& grid,
                                 double timestamp) {
  if (img.doppler.rows() != grid.rows() || img.doppler.cols() != grid.cols() ||
      img.log_variance.rows() != grid.rows() || img.log_variance.cols() != grid.cols()) {
    fail("shape-mismatch", "doppler image shape does not match direction grid");
  }
  const Index n = grid.rows() * grid.cols();
  // Rows of the design matrix are -u^T so that D v = d (receding positive).
  Eigen::MatrixXd design = -grid.directions;
  Eigen::VectorXd rhs(n), weights(n);
  for (Index e = 0; e < grid.rows(); ++e) {
    for (Index a = 0; a < grid.cols(); ++a) {
      rhs[e * grid.cols() + a] = img.doppler(e, a);
      weights[e * grid.cols() + a] = std::exp(-img.log_variance(e, a));
    }
  }
  const WlsSolution sol = solve_weighted(design, rhs, weights);
  return {timestamp, sol.v, sol.covariance, VelocitySource::kDopplerWls};
}

VelocityMeasurement pc_velocity(std::span<const RadarPoint> points, const RansacParams& params,
                                double timestamp) {
  const Index n = static_cast<Index>(points.size());
  if (n < params.min_points) {
    fail("insufficient-points", "need at least " + std::to_string(params.min_points) +
                                    " radar points for a velocity fit");
  }

  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (Index i = 0; i < n; ++i) {
    const double range = points[i].position.norm();
    if (range <= 0) fail("invalid-argument", "radar point at the sensor origin");
    design.row(i) = -(points[i].position / range).transpose();
    rhs[i] = points[i].doppler;
  }

  std::vector<Index> inliers(static_cast<size_t>(n));
  std::iota(inliers.begin(), inliers.end(), Index{0});

  if (params.enabled && n > params.min_points) {
    std::mt19937_64 rng(params.seed);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    std::vector<Index> best;
    double best_rss = std::numeric_limits<double>::infinity();
    for (int it = 0; it < params.iterations; ++it) {
      Index a = pick(rng), b = pick(rng), c = pick(rng);
      if (a == b || b == c || a == c) continue;
      Mat3 d3;
      d3 << design.row(a), design.row(b), design.row(c);
      if (std::abs(d3.determinant()) < 1e-9) continue;
      const Vec3 v = d3.partialPivLu().solve(Vec3(rhs[a], rhs[b], rhs[c]));
      std::vector<Index> support;
      double rss = 0;
      for (Index i = 0; i < n; ++i) {
        const double r = rhs[i] - design.row(i).dot(v);
        if (std::abs(r) <= params.inlier_threshold) {
          support.push_back(i);
          rss += r * r;
        }
      }
      if (support.size() > best.size() || (support.size() == best.size() && rss < best_rss)) {
        best = std::move(support);
        best_rss = rss;
      }
    }
    if (static_cast<Index>(best.size()) < params.min_points) {
      fail("insufficient-points", "consensus loop left fewer inliers than the minimal sample");
    }
    inliers = std::move(best);
  }

  const Index m = static_cast<Index>(inliers.size());
  Eigen::MatrixXd a(m, 3);
  Eigen::VectorXd d(m);
  for (Index i = 0; i < m; ++i) {
    a.row(i) = design.row(inliers[static_cast<size_t>(i)]);
    d[i] = rhs[inliers[static_cast<size_t>(i)]];
  }
  const WlsSolution sol = solve_weighted(a, d, Eigen::VectorXd::Ones(m));

  // Covariance scaled by the inlier residual variance, floored so the
  // matrix stays positive definite on noise-free input.
  const Eigen::VectorXd residuals = d - a * sol.v;
  const Index dof = std::max<Index>(m - 3, 1);
  const double sigma2 = std::max(residuals.squaredNorm() / static_cast<double>(dof), 1e-12);

  return {timestamp, sol.v, sigma2 * sol.covariance, VelocitySource::kPointCloud};
}

VelocityMeasurement direct_velocity(const Vec3& v, const std::optional<Vec3>& log_variance,
                                    double timestamp) {
  if (!v.allFinite() || (log_variance && !log_variance->allFinite())) {
    fail("non-finite", "direct velocity feed carries non-finite values");
  }
  Mat3 cov;
  if (log_variance) {
    cov = log_variance->array().exp().matrix().asDiagonal();
  } else {
    cov = 0.01 * Mat3::Identity();
  }
  return {timestamp, v, cov, VelocitySource::kDirect};
}

}  // namespace rio
