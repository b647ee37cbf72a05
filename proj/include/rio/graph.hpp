#pragma once

#include <optional>

#include <Eigen/Sparse>

#include "rio/imu.hpp"
#include "rio/velocity.hpp"

namespace rio {

struct RobustParams {
  double huber_delta = 1.0;   // whitened units
  int max_iterations = 20;
  double tolerance = 1e-8;    // update-norm convergence
  double lambda_init = 1e-4;  // Levenberg damping
};

/// Radar-to-body extrinsic. lever_arm enables the omega x t term on
/// velocity residuals when the factor carries an angular rate.
struct Extrinsic {
  Mat3 rotation = Mat3::Identity();   // body <- sensor
  Vec3 translation = Vec3::Zero();    // sensor origin in body frame
  bool lever_arm = false;
};

struct ImuFactor {
  PreintegratedImu preint;
  Index i = 0;
  Index j = 0;
};

struct VelocityFactor {
  VelocityMeasurement meas;
  Index state = 0;
  std::optional<Vec3> body_angular_rate;  // for the lever-arm term
};

/// Locking prior on the six pose degrees of freedom of the oldest state.
struct PosePrior {
  Mat3 rotation = Mat3::Identity();
  Vec3 position = Vec3::Zero();
  double information = 0;  // 0 = inactive
};

struct BiasPrior {
  ImuBias mean;
  double information = 0;
};

struct Window {
  std::vector<FrameState> states;
  std::vector<ImuFactor> imu_factors;
  std::vector<VelocityFactor> velocity_factors;
  PosePrior pose_prior;  // on states[0]
  BiasPrior bias_prior;  // on states[0]
  ImuNoise noise;
  Extrinsic extrinsic;
  double pose_lock_information = 1e12;

  double span() const {
    return states.empty() ? 0.0 : states.back().timestamp - states.front().timestamp;
  }
};

/// Body-frame velocity residual r = R_bs^T (R_j^T v_world + omega x t_bs) - v_meas.
Vec3 velocity_residual(const FrameState& state, const VelocityMeasurement& meas,
                       const Extrinsic& extrinsic, const std::optional<Vec3>& omega = {});

/// IRLS weight for the Huber cost: 1 inside delta, delta / r beyond.
double huber_weight(double residual_norm, double delta);

/// Total robustified cost (1/2 sum of whitened squares, Huber on velocity
/// factors). Optionally assembles the Gauss-Newton normal equations over
/// 15-dof state blocks [rot, pos, vel, bg, ba].
double build_normal_equations(const Window& window, const RobustParams& robust,
                              Eigen::SparseMatrix<double>* h = nullptr,
                              Eigen::VectorXd* b = nullptr);

struct OptimizeReport {
  int iterations = 0;
  double initial_cost = 0;
  double final_cost = 0;
  bool converged = false;
};

/// Damped Gauss-Newton on the manifold (rotations via exponential map,
/// right perturbation). The window is updated in place.
OptimizeReport optimize(Window& window, const RobustParams& robust);

/// Removes states older than the horizon (relative to the newest state) and
/// re-locks the oldest retained pose at its current estimate. Removed
/// states are appended to `removed` when given. Returns the removal count.
int marginalize(Window& window, double horizon, std::vector<FrameState>* removed = nullptr);

/// Planar constraint: zeroes the z component of the pose-prior mean.
void planar_project(Window& window);

}  // namespace rio
