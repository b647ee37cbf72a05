#include "rio/imu.hpp"

#include <random>

#include "doctest.h"
#include "helpers.hpp"

using namespace rio;

namespace {

/// Smooth band-limited test signals for gyro and accel.
struct SmoothImuSignal {
  Vec3 omega_amp, omega_freq, omega_phase;
  Vec3 accel_amp, accel_freq, accel_phase;

  static SmoothImuSignal random(std::mt19937_64& rng, double omega_scale = 0.4,
                                double accel_scale = 0.6) {
    std::uniform_real_distribution<double> amp(0.1, 1.0), freq(0.1, 0.6),
        phase(0.0, 2.0 * M_PI);
    SmoothImuSignal s;
    for (int k = 0; k < 3; ++k) {
      s.omega_amp[k] = omega_scale * amp(rng);
      s.omega_freq[k] = freq(rng);
      s.omega_phase[k] = phase(rng);
      s.accel_amp[k] = accel_scale * amp(rng);
      s.accel_freq[k] = freq(rng);
      s.accel_phase[k] = phase(rng);
    }
    return s;
  }

  Vec3 omega(double t) const {
    Vec3 w;
    for (int k = 0; k < 3; ++k) {
      w[k] = omega_amp[k] * std::sin(2.0 * M_PI * omega_freq[k] * t + omega_phase[k]);
    }
    return w;
  }
  Vec3 accel(double t) const {
    Vec3 a;
    for (int k = 0; k < 3; ++k) {
      a[k] = accel_amp[k] * std::sin(2.0 * M_PI * accel_freq[k] * t + accel_phase[k]);
    }
    return a;
  }

  std::vector<ImuSample> sample(double duration, double rate) const {
    std::vector<ImuSample> out;
    const auto n = static_cast<size_t>(std::llround(duration * rate)) + 1;
    for (size_t k = 0; k < n; ++k) {
      const double t = double(k) / rate;
      out.push_back({t, omega(t), accel(t)});
    }
    return out;
  }
};

struct Deltas {
  Mat3 rotation = Mat3::Identity();
  Vec3 velocity = Vec3::Zero();
  Vec3 position = Vec3::Zero();
};

/// Independent dense integrator: treats the sample stream as piecewise
/// linear and integrates at `substeps` steps per sample interval.
Deltas dense_integrate(std::span<const ImuSample> samples, const ImuBias& bias,
                       int substeps) {
  Deltas d;
  auto interp = [&](double t) -> ImuSample {
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double x, const ImuSample& s) { return x < s.timestamp; });
    if (it == samples.begin()) return samples.front();
    if (it == samples.end()) return samples.back();
    const ImuSample& b = *it;
    const ImuSample& a = *(it - 1);
    const double w = (t - a.timestamp) / (b.timestamp - a.timestamp);
    return {t, a.gyro + w * (b.gyro - a.gyro), a.accel + w * (b.accel - a.accel)};
  };
  for (size_t k = 0; k + 1 < samples.size(); ++k) {
    const double t0 = samples[k].timestamp;
    const double h = (samples[k + 1].timestamp - t0) / double(substeps);
    for (int s = 0; s < substeps; ++s) {
      const double t = t0 + s * h;
      const Vec3 w_mid = interp(t + 0.5 * h).gyro - bias.gyro;
      const Mat3 r_next = d.rotation * so3_exp(w_mid * h);
      const Vec3 a0 = interp(t).accel - bias.accel;
      const Vec3 a1 = interp(t + h).accel - bias.accel;
      const Vec3 a_world = 0.5 * (d.rotation * a0 + r_next * a1);
      d.position += d.velocity * h + 0.5 * a_world * h * h;
      d.velocity += a_world * h;
      d.rotation = r_next;
    }
  }
  return d;
}

FrameState propagate(const FrameState& s, const PreintegratedImu& p, const Vec3& g) {
  FrameState out;
  out.timestamp = s.timestamp + p.delta_time;
  out.rotation = s.rotation * p.delta_rotation;
  out.velocity = s.velocity + g * p.delta_time + s.rotation * p.delta_velocity;
  out.position = s.position + s.velocity * p.delta_time + 0.5 * g * p.delta_time * p.delta_time +
                 s.rotation * p.delta_position;
  out.bias = s.bias;
  return out;
}

}  // namespace

TEST_CASE("preintegrate of zero motion is the identity") {
  std::vector<ImuSample> samples;
  for (int k = 0; k <= 100; ++k) samples.push_back({k * 0.01, Vec3::Zero(), Vec3::Zero()});
  const PreintegratedImu p = preintegrate(samples, {}, {});
  CHECK((p.delta_rotation - Mat3::Identity()).norm() < 1e-12);
  CHECK(p.delta_velocity.norm() < 1e-12);
  CHECK(p.delta_position.norm() < 1e-12);
  CHECK(p.delta_time == doctest::Approx(1.0));
}

TEST_CASE("preintegrate constant yaw rate gives the closed-form rotation") {
  std::vector<ImuSample> samples;
  for (int k = 0; k <= 200; ++k) samples.push_back({k * 0.01, Vec3(0, 0, 0.5), Vec3::Zero()});
  const PreintegratedImu p = preintegrate(samples, {}, {});
  const Mat3 want = rot_z(1.0);  // 0.5 rad/s for 2 s
  CHECK((p.delta_rotation - want).norm() < 1e-6);
  CHECK(p.delta_velocity.norm() < 1e-12);
}

TEST_CASE("preintegrate matches a 100x-finer dense integration oracle") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const SmoothImuSignal sig = SmoothImuSignal::random(rng);
    const auto samples = sig.sample(1.0, 200.0);
    const PreintegratedImu p = preintegrate(samples, {}, {});
    const Deltas fine = dense_integrate(samples, {}, 100);

    CHECK(so3_log(fine.rotation.transpose() * p.delta_rotation).norm() <
          1e-4 * std::max(so3_log(fine.rotation).norm(), 1e-2));
    CHECK((p.delta_velocity - fine.velocity).norm() < 1e-4 * fine.velocity.norm());
    CHECK((p.delta_position - fine.position).norm() < 1e-4 * fine.position.norm());
  }
}

TEST_CASE("preintegrate validates its input") {
  std::vector<ImuSample> one{{0.0, Vec3::Zero(), Vec3::Zero()}};
  CHECK_THROWS_AS(preintegrate(one, {}, {}), Error);

  std::vector<ImuSample> unsorted{{0.0, Vec3::Zero(), Vec3::Zero()},
                                  {0.2, Vec3::Zero(), Vec3::Zero()},
                                  {0.1, Vec3::Zero(), Vec3::Zero()}};
  CHECK_THROWS_AS(preintegrate(unsorted, {}, {}), Error);

  std::vector<ImuSample> degenerate{{0.0, Vec3::Zero(), Vec3::Zero()},
                                    {1e-9, Vec3::Zero(), Vec3::Zero()}};
  CHECK_THROWS_AS(preintegrate(degenerate, {}, {}), Error);
}

TEST_CASE("preintegration covariance trace grows with every sample") {
  std::mt19937_64 rng(62);
  const SmoothImuSignal sig = SmoothImuSignal::random(rng);
  const auto samples = sig.sample(0.5, 100.0);
  double prev = 0;
  for (size_t n = 2; n <= samples.size(); n += 5) {
    const PreintegratedImu p =
        preintegrate(std::span(samples.data(), n), {}, {});
    const double tr = p.covariance.trace();
    CHECK(tr >= prev);
    prev = tr;
  }
}

TEST_CASE("preintegration covariance is symmetric positive semidefinite") {
  std::mt19937_64 rng(63);
  const SmoothImuSignal sig = SmoothImuSignal::random(rng);
  const auto samples = sig.sample(0.7, 100.0);
  const PreintegratedImu p = preintegrate(samples, {}, {});
  CHECK((p.covariance - p.covariance.transpose()).norm() < 1e-15);
  Eigen::SelfAdjointEigenSolver<Mat9> eig(p.covariance);
  CHECK(eig.eigenvalues().minCoeff() >= 0);
}

TEST_CASE("first-order bias correction matches re-preintegration") {
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 10; ++trial) {
    const SmoothImuSignal sig = SmoothImuSignal::random(rng);
    const auto samples = sig.sample(0.5, 100.0);
    const ImuBias base{Vec3(0.01, -0.02, 0.015), Vec3(0.05, 0.02, -0.04)};
    const PreintegratedImu p = preintegrate(samples, base, {});

    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Vec3 dbg = 1e-3 * Vec3(u(rng), u(rng), u(rng)).normalized();
    const Vec3 dba = 1e-3 * Vec3(u(rng), u(rng), u(rng)).normalized();
    ImuBias shifted = base;
    shifted.gyro += dbg;
    shifted.accel += dba;
    const PreintegratedImu q = preintegrate(samples, shifted, {});

    const Mat3 corrected_r = p.delta_rotation * so3_exp(p.d_rotation_d_bg * dbg);
    const Vec3 corrected_v =
        p.delta_velocity + p.d_velocity_d_bg * dbg + p.d_velocity_d_ba * dba;
    const Vec3 corrected_p =
        p.delta_position + p.d_position_d_bg * dbg + p.d_position_d_ba * dba;

    CHECK(so3_log(q.delta_rotation.transpose() * corrected_r).norm() < 1e-6);
    CHECK((q.delta_velocity - corrected_v).norm() < 1e-6);
    CHECK((q.delta_position - corrected_p).norm() < 1e-6);
  }
}

TEST_CASE("imu_residual vanishes on states propagated through the deltas") {
  std::mt19937_64 rng(65);
  const Vec3 gravity(0, 0, -9.80665);
  for (int trial = 0; trial < 10; ++trial) {
    const SmoothImuSignal sig = SmoothImuSignal::random(rng);
    const auto samples = sig.sample(0.5, 100.0);
    const PreintegratedImu p = preintegrate(samples, {}, {});

    FrameState si;
    si.timestamp = 0.0;
    si.rotation = test::random_rotation(rng);
    si.position = Vec3(1, -2, 0.5);
    si.velocity = Vec3(0.4, 0.1, -0.2);
    const FrameState sj = propagate(si, p, gravity);

    const Vec9 r = imu_residual(si, sj, p, gravity);
    CHECK(r.norm() < 1e-6);
  }
}

TEST_CASE("position residual responds to state_j perturbations as Ri^T") {
  std::mt19937_64 rng(66);
  const Vec3 gravity(0, 0, -9.80665);
  const SmoothImuSignal sig = SmoothImuSignal::random(rng);
  const auto samples = sig.sample(0.4, 100.0);
  const PreintegratedImu p = preintegrate(samples, {}, {});

  FrameState si;
  si.timestamp = 0.0;
  si.rotation = test::random_rotation(rng);
  FrameState sj = propagate(si, p, gravity);

  const Vec9 base = imu_residual(si, sj, p, gravity);
  const Vec3 delta(1e-4, -2e-4, 3e-4);
  sj.position += delta;
  const Vec9 shifted = imu_residual(si, sj, p, gravity);
  const Vec3 got = shifted.segment<3>(6) - base.segment<3>(6);
  CHECK((got - si.rotation.transpose() * delta).norm() < 1e-9);
}

TEST_CASE("imu_residual rejects mismatched timestamps and degenerate spans") {
  std::vector<ImuSample> samples;
  for (int k = 0; k <= 50; ++k) samples.push_back({k * 0.01, Vec3::Zero(), Vec3::Zero()});
  const PreintegratedImu p = preintegrate(samples, {}, {});
  FrameState si, sj;
  si.timestamp = 0.0;
  sj.timestamp = 0.5;
  CHECK(imu_residual(si, sj, p, Vec3(0, 0, -9.81)).size() == 9);

  sj.timestamp = 0.6;  // beyond the 1 ms slack
  CHECK_THROWS_AS(imu_residual(si, sj, p, Vec3(0, 0, -9.81)), Error);

  PreintegratedImu zero_span = p;
  zero_span.delta_time = 1e-9;
  sj.timestamp = 0.5;
  CHECK_THROWS_AS(imu_residual(si, sj, zero_span, Vec3(0, 0, -9.81)), Error);
}

TEST_CASE("analytic residual Jacobians match central finite differences") {
  std::mt19937_64 rng(67);
  const Vec3 gravity(0, 0, -9.80665);
  const double step = 1e-6;
  int checked = 0;

  for (int trial = 0; trial < 100; ++trial) {
    const SmoothImuSignal sig = SmoothImuSignal::random(rng);
    const auto samples = sig.sample(0.3, 100.0);
    const ImuBias lin_bias{Vec3(0.002, -0.001, 0.003), Vec3(0.01, -0.02, 0.005)};
    const PreintegratedImu p = preintegrate(samples, lin_bias, {});

    std::uniform_real_distribution<double> u(-1.0, 1.0);
    FrameState si;
    si.timestamp = 0.0;
    si.rotation = test::random_rotation(rng);
    si.position = Vec3(u(rng), u(rng), u(rng));
    si.velocity = 0.5 * Vec3(u(rng), u(rng), u(rng));
    si.bias.gyro = lin_bias.gyro + 0.01 * Vec3(u(rng), u(rng), u(rng));
    si.bias.accel = lin_bias.accel + 0.05 * Vec3(u(rng), u(rng), u(rng));
    FrameState sj = propagate(si, p, gravity);
    // Perturb state_j away from the fixed point so the residual is generic.
    sj.rotation = sj.rotation * so3_exp(0.02 * Vec3(u(rng), u(rng), u(rng)));
    sj.position += 0.05 * Vec3(u(rng), u(rng), u(rng));
    sj.velocity += 0.05 * Vec3(u(rng), u(rng), u(rng));

    ImuResidualJacobians jac;
    imu_residual(si, sj, p, gravity, &jac);

    auto apply = [](const FrameState& s, int dof, double eps) {
      FrameState out = s;
      if (dof < 3) {
        out.rotation = s.rotation * so3_exp(eps * Vec3::Unit(dof));
      } else if (dof < 6) {
        out.position[dof - 3] += eps;
      } else if (dof < 9) {
        out.velocity[dof - 6] += eps;
      } else if (dof < 12) {
        out.bias.gyro[dof - 9] += eps;
      } else {
        out.bias.accel[dof - 12] += eps;
      }
      return out;
    };

    Eigen::Matrix<double, 9, 15> fd_i, fd_j;
    for (int dof = 0; dof < 15; ++dof) {
      fd_i.col(dof) = (imu_residual(apply(si, dof, step), sj, p, gravity) -
                       imu_residual(apply(si, dof, -step), sj, p, gravity)) /
                      (2 * step);
      fd_j.col(dof) = (imu_residual(si, apply(sj, dof, step), p, gravity) -
                       imu_residual(si, apply(sj, dof, -step), p, gravity)) /
                      (2 * step);
    }
    const double scale_i = std::max(fd_i.cwiseAbs().maxCoeff(), 1.0);
    const double scale_j = std::max(fd_j.cwiseAbs().maxCoeff(), 1.0);
    CHECK((jac.d_state_i - fd_i).cwiseAbs().maxCoeff() < 1e-4 * scale_i);
    CHECK((jac.d_state_j - fd_j).cwiseAbs().maxCoeff() < 1e-4 * scale_j);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("slice_interval interpolates the boundary samples") {
  std::vector<ImuSample> stream;
  for (int k = 0; k <= 100; ++k) {
    stream.push_back({k * 0.01, Vec3(0, 0, double(k)), Vec3(double(k), 0, 0)});
  }
  const auto cut = slice_interval(stream, 0.123, 0.456);
  CHECK(cut.front().timestamp == doctest::Approx(0.123));
  CHECK(cut.back().timestamp == doctest::Approx(0.456));
  CHECK(cut.front().gyro.z() == doctest::Approx(12.3));
  CHECK(cut.back().accel.x() == doctest::Approx(45.6));
  for (size_t k = 1; k < cut.size(); ++k) {
    CHECK(cut[k].timestamp > cut[k - 1].timestamp);
  }

  CHECK_THROWS_AS(slice_interval(stream, -0.5, 0.2), Error);
  CHECK_THROWS_AS(slice_interval(stream, 0.9, 1.5), Error);
  CHECK_THROWS_AS(slice_interval(stream, 0.3, 0.3), Error);
}
