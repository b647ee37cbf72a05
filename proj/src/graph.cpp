#include "rio/graph.hpp"

#include <Eigen/SparseCholesky>

namespace rio {

namespace {

constexpr Index kStateDof = 15;
constexpr double kTimestampSlack = 1e-3;

struct Assembler {
  std::vector<Eigen::Triplet<double>>* triplets = nullptr;
  Eigen::VectorXd* b = nullptr;

  /// Accumulates J^T J and -J^T r for one factor over its state blocks.
  template <int ResDim>
  void add(std::span<const Index> states,
           std::span<const Eigen::Matrix<double, ResDim, kStateDof>> jacobians,
           const Eigen::Matrix<double, ResDim, 1>& residual) {
    if (!triplets) return;
    for (size_t a = 0; a < states.size(); ++a) {
      const Index row0 = states[a] * kStateDof;
      b->template segment<kStateDof>(row0) -= jacobians[a].transpose() * residual;
      for (size_t c = 0; c < states.size(); ++c) {
        const Index col0 = states[c] * kStateDof;
        const Eigen::Matrix<double, kStateDof, kStateDof> block =
            jacobians[a].transpose() * jacobians[c];
        for (Index r = 0; r < kStateDof; ++r) {
          for (Index cc = 0; cc < kStateDof; ++cc) {
            if (block(r, cc) != 0.0) triplets->emplace_back(row0 + r, col0 + cc, block(r, cc));
          }
        }
      }
    }
  }
};

void retract(std::vector<FrameState>& states, const Eigen::VectorXd& dx) {
  for (size_t k = 0; k < states.size(); ++k) {
    const auto d = dx.segment<kStateDof>(static_cast<Index>(k) * kStateDof);
    states[k].rotation = states[k].rotation * so3_exp(d.segment<3>(0));
    states[k].position += d.segment<3>(3);
    states[k].velocity += d.segment<3>(6);
    states[k].bias.gyro += d.segment<3>(9);
    states[k].bias.accel += d.segment<3>(12);
  }
}

void check_window(const Window& window) {
  if (window.states.size() < 2) fail("invalid-argument", "optimize needs >= 2 states");
  std::vector<bool> linked(window.states.size(), false);
  linked[0] = true;
  for (const auto& f : window.imu_factors) {
    if (f.i < 0 || f.j <= f.i || f.j >= static_cast<Index>(window.states.size())) {
      fail("invalid-argument", "IMU factor references states outside the window");
    }
    linked[static_cast<size_t>(f.j)] = true;
  }
  for (size_t k = 0; k < linked.size(); ++k) {
    if (!linked[k]) fail("invalid-argument", "state without an IMU factor to its predecessor");
  }
  for (const auto& f : window.velocity_factors) {
    if (f.state < 0 || f.state >= static_cast<Index>(window.states.size())) {
      fail("invalid-argument", "velocity factor references a state outside the window");
    }
  }
}

}  // namespace

Vec3 velocity_residual(const FrameState& state, const VelocityMeasurement& meas,
                       const Extrinsic& extrinsic, const std::optional<Vec3>& omega) {
  if (std::abs(state.timestamp - meas.timestamp) > kTimestampSlack) {
    fail("timestamp-mismatch", "velocity measurement does not match the state timestamp");
  }
  Vec3 v_body = state.rotation.transpose() * state.velocity;
  if (extrinsic.lever_arm && omega) {
    v_body += (*omega - state.bias.gyro).cross(extrinsic.translation);
  }
  return extrinsic.rotation.transpose() * v_body - meas.v;
}

double huber_weight(double residual_norm, double delta) {
  if (residual_norm <= delta) return 1.0;
  return delta / residual_norm;
}

double build_normal_equations(const Window& window, const RobustParams& robust,
                              Eigen::SparseMatrix<double>* h, Eigen::VectorXd* b) {
  const Index n = static_cast<Index>(window.states.size()) * kStateDof;
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd grad;
  Assembler assemble;
  if (h) {
    triplets.reserve(static_cast<size_t>(window.states.size()) * 1024);
    grad = Eigen::VectorXd::Zero(n);
    assemble.triplets = &triplets;
    assemble.b = &grad;
  }

  double cost = 0;
  using Jac9 = Eigen::Matrix<double, 9, kStateDof>;
  using Jac6 = Eigen::Matrix<double, 6, kStateDof>;
  using Jac3 = Eigen::Matrix<double, 3, kStateDof>;

  // Pose lock prior on the oldest state.
  if (window.pose_prior.information > 0) {
    const FrameState& s0 = window.states.front();
    Eigen::Matrix<double, 6, 1> r;
    r.segment<3>(0) = so3_log(window.pose_prior.rotation.transpose() * s0.rotation);
    r.segment<3>(3) = s0.position - window.pose_prior.position;
    const double w = std::sqrt(window.pose_prior.information);
    Jac6 j = Jac6::Zero();
    j.block<3, 3>(0, 0) = w * so3_right_jacobian_inverse(r.segment<3>(0));
    j.block<3, 3>(3, 3) = w * Mat3::Identity();
    r *= w;
    cost += 0.5 * r.squaredNorm();
    const std::array<Index, 1> idx{0};
    const std::array<Jac6, 1> jacs{j};
    assemble.add<6>(idx, jacs, r);
  }

  // Weak bias prior on the oldest state (keeps the system well posed).
  if (window.bias_prior.information > 0) {
    const FrameState& s0 = window.states.front();
    Eigen::Matrix<double, 6, 1> r;
    r.segment<3>(0) = s0.bias.gyro - window.bias_prior.mean.gyro;
    r.segment<3>(3) = s0.bias.accel - window.bias_prior.mean.accel;
    const double w = std::sqrt(window.bias_prior.information);
    Jac6 j = Jac6::Zero();
    j.block<3, 3>(0, 9) = w * Mat3::Identity();
    j.block<3, 3>(3, 12) = w * Mat3::Identity();
    r *= w;
    cost += 0.5 * r.squaredNorm();
    const std::array<Index, 1> idx{0};
    const std::array<Jac6, 1> jacs{j};
    assemble.add<6>(idx, jacs, r);
  }

  // IMU preintegration factors, whitened by the preintegrated covariance.
  for (const auto& f : window.imu_factors) {
    ImuResidualJacobians jac;
    const Vec9 r = imu_residual(window.states[static_cast<size_t>(f.i)],
                                window.states[static_cast<size_t>(f.j)], f.preint,
                                window.noise.gravity, h ? &jac : nullptr);
    const Eigen::LLT<Mat9> llt(f.preint.covariance);
    const Vec9 rw = llt.matrixL().solve(r);
    cost += 0.5 * rw.squaredNorm();
    if (h) {
      std::array<Jac9, 2> jacs{llt.matrixL().solve(jac.d_state_i),
                               llt.matrixL().solve(jac.d_state_j)};
      const std::array<Index, 2> idx{f.i, f.j};
      assemble.add<9>(idx, jacs, rw);
    }

    // Bias random walk between the connected states.
    const double dt = std::max(f.preint.delta_time, 1e-6);
    const double sg = std::max(window.noise.gyro_bias_walk, 1e-8) * std::sqrt(dt);
    const double sa = std::max(window.noise.accel_bias_walk, 1e-8) * std::sqrt(dt);
    const FrameState& si = window.states[static_cast<size_t>(f.i)];
    const FrameState& sj = window.states[static_cast<size_t>(f.j)];
    Eigen::Matrix<double, 6, 1> rb;
    rb.segment<3>(0) = (sj.bias.gyro - si.bias.gyro) / sg;
    rb.segment<3>(3) = (sj.bias.accel - si.bias.accel) / sa;
    cost += 0.5 * rb.squaredNorm();
    if (h) {
      Jac6 ji = Jac6::Zero(), jj = Jac6::Zero();
      ji.block<3, 3>(0, 9) = -Mat3::Identity() / sg;
      ji.block<3, 3>(3, 12) = -Mat3::Identity() / sa;
      jj.block<3, 3>(0, 9) = Mat3::Identity() / sg;
      jj.block<3, 3>(3, 12) = Mat3::Identity() / sa;
      const std::array<Index, 2> idx{f.i, f.j};
      const std::array<Jac6, 2> jacs{ji, jj};
      assemble.add<6>(idx, jacs, rb);
    }
  }

  // Velocity factors, whitened by the measurement covariance, Huber-weighted.
  for (const auto& f : window.velocity_factors) {
    const FrameState& s = window.states[static_cast<size_t>(f.state)];
    const Vec3 r = velocity_residual(s, f.meas, window.extrinsic, f.body_angular_rate);
    const Eigen::LLT<Mat3> llt(f.meas.cov);
    const Vec3 rw = llt.matrixL().solve(r);
    const double norm = rw.norm();
    if (norm <= robust.huber_delta) {
      cost += 0.5 * norm * norm;
    } else {
      cost += robust.huber_delta * (norm - 0.5 * robust.huber_delta);
    }
    if (h) {
      const double wgt = std::sqrt(huber_weight(norm, robust.huber_delta));
      Jac3 j = Jac3::Zero();
      const Vec3 v_body = s.rotation.transpose() * s.velocity;
      j.block<3, 3>(0, 0) = window.extrinsic.rotation.transpose() * skew(v_body);
      j.block<3, 3>(0, 6) = window.extrinsic.rotation.transpose() * s.rotation.transpose();
      if (window.extrinsic.lever_arm && f.body_angular_rate) {
        j.block<3, 3>(0, 9) =
            window.extrinsic.rotation.transpose() * skew(window.extrinsic.translation);
      }
      const std::array<Index, 1> idx{f.state};
      const std::array<Jac3, 1> jacs{(llt.matrixL().solve(j) * wgt).eval()};
      assemble.add<3>(idx, jacs, (rw * wgt).eval());
    }
  }

  if (h) {
    h->resize(n, n);
    h->setFromTriplets(triplets.begin(), triplets.end());
    *b = grad;
  }
  return cost;
}

OptimizeReport optimize(Window& window, const RobustParams& robust) {
  check_window(window);

  OptimizeReport report;
  double cost = build_normal_equations(window, robust);
  report.initial_cost = cost;
  report.final_cost = cost;
  if (!std::isfinite(cost)) {
    fail("optimization-diverged", "window cost is not finite");
  }

  double lambda = robust.lambda_init;
  Eigen::SparseMatrix<double> h;
  Eigen::VectorXd b;

  for (int it = 0; it < robust.max_iterations; ++it) {
    build_normal_equations(window, robust, &h, &b);
    const Eigen::VectorXd diag = h.diagonal().cwiseMax(1e-12);

    bool accepted = false;
    for (int attempt = 0; attempt < 10 && !accepted; ++attempt) {
      Eigen::SparseMatrix<double> damped = h;
      for (Index k = 0; k < diag.size(); ++k) damped.coeffRef(k, k) += lambda * diag[k];
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(damped);
      if (solver.info() != Eigen::Success) {
        lambda *= 10;
        continue;
      }
      const Eigen::VectorXd dx = solver.solve(b);
      if (!dx.allFinite()) {
        lambda *= 10;
        continue;
      }

      std::vector<FrameState> candidate = window.states;
      retract(candidate, dx);
      Window trial = window;  // factors are shared copies; states swapped below
      trial.states = std::move(candidate);
      const double trial_cost = build_normal_equations(trial, robust);

      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        window.states = std::move(trial.states);
        cost = trial_cost;
        lambda = std::max(lambda / 10, 1e-12);
        accepted = true;
        report.iterations = it + 1;
        report.final_cost = cost;
        if (dx.norm() < robust.tolerance) {
          report.converged = true;
          return report;
        }
      } else {
        lambda *= 10;
      }
    }
    if (!accepted) {
      // No admissible step at any damping; treat the current iterate as final.
      report.converged = true;
      return report;
    }
  }
  report.final_cost = cost;
  return report;
}

int marginalize(Window& window, double horizon, std::vector<FrameState>* removed) {
  if (window.states.size() < 2) return 0;
  const double newest = window.states.back().timestamp;
  size_t drop = 0;
  while (drop + 1 < window.states.size() &&
         newest - window.states[drop].timestamp > horizon) {
    ++drop;
  }
  if (drop == 0) return 0;

  if (removed) {
    removed->insert(removed->end(), window.states.begin(),
                    window.states.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  window.states.erase(window.states.begin(),
                      window.states.begin() + static_cast<std::ptrdiff_t>(drop));

  std::vector<ImuFactor> imu_kept;
  for (auto& f : window.imu_factors) {
    if (f.i >= static_cast<Index>(drop)) {
      f.i -= static_cast<Index>(drop);
      f.j -= static_cast<Index>(drop);
      imu_kept.push_back(std::move(f));
    }
  }
  window.imu_factors = std::move(imu_kept);

  std::vector<VelocityFactor> vel_kept;
  for (auto& f : window.velocity_factors) {
    if (f.state >= static_cast<Index>(drop)) {
      f.state -= static_cast<Index>(drop);
      vel_kept.push_back(std::move(f));
    }
  }
  window.velocity_factors = std::move(vel_kept);

  // Re-lock the new oldest pose at its current estimate.
  window.pose_prior.rotation = window.states.front().rotation;
  window.pose_prior.position = window.states.front().position;
  window.pose_prior.information = window.pose_lock_information;
  if (window.bias_prior.information > 0) {
    window.bias_prior.mean = window.states.front().bias;
  }
  return static_cast<int>(drop);
}

void planar_project(Window& window) {
  window.pose_prior.position.z() = 0.0;
}

}  // namespace rio
