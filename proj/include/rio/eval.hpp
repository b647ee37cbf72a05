#pragma once

#include "rio/geometry.hpp"

namespace rio {

struct AssocStats {
  size_t matched = 0;
  size_t dropped_est = 0;
  size_t dropped_gt = 0;
};

/// Nearest-timestamp pairing within max_dt; unmatched poses are dropped.
std::vector<std::pair<Index, Index>> associate(const Trajectory& est, const Trajectory& gt,
                                               double max_dt = 0.05,
                                               AssocStats* stats = nullptr);

/// Rigid SE(3) alignment (scale fixed to 1) minimizing the squared position
/// distances; the returned transform maps est points onto gt.
Pose umeyama_se3(const std::vector<Vec3>& est, const std::vector<Vec3>& gt);

/// RMS translation error after association and Umeyama alignment.
double ape_rmse(const Trajectory& est, const Trajectory& gt, double max_dt = 0.05);

/// RMS relative-pose translation error over ground-truth arc-length
/// intervals; pairs (i, j) take the first crossing of the interval.
double rpe_rmse(const Trajectory& est, const Trajectory& gt, double interval_m = 10.0,
                double max_dt = 0.05);

struct EvalReport {
  double ape_rmse = 0;
  double rpe_rmse = 0;
  double rpe_interval = 10.0;
  size_t pairs = 0;       // associated pose pairs
  size_t rpe_pairs = 0;   // arc-length interval pairs
  Pose alignment;         // est -> gt
  std::vector<double> ape_residuals;
  std::vector<double> rpe_residuals;
};

EvalReport evaluate(const Trajectory& est, const Trajectory& gt, double interval_m = 10.0,
                    double max_dt = 0.05);

}  // namespace rio
