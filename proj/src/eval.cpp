#include "rio/eval.hpp"

#include <algorithm>
#include <cmath>

namespace rio {

namespace {

void check_trajectory(const Trajectory& traj, const char* name) {
  if (traj.empty()) fail("empty-input", std::string(name) + " trajectory is empty");
  for (size_t k = 1; k < traj.size(); ++k) {
    if (!(traj[k].timestamp > traj[k - 1].timestamp)) {
      fail("invalid-argument", std::string(name) + " timestamps must be strictly increasing");
    }
  }
}

struct AlignedPairs {
  std::vector<Vec3> est, gt;
  std::vector<std::pair<Index, Index>> index_pairs;
};

AlignedPairs paired_positions(const Trajectory& est, const Trajectory& gt, double max_dt) {
  AlignedPairs out;
  out.index_pairs = associate(est, gt, max_dt);
  out.est.reserve(out.index_pairs.size());
  out.gt.reserve(out.index_pairs.size());
  for (const auto& [i, j] : out.index_pairs) {
    out.est.push_back(est[static_cast<size_t>(i)].pose.translation);
    out.gt.push_back(gt[static_cast<size_t>(j)].pose.translation);
  }
  return out;
}

}  // namespace

std::vector<std::pair<Index, Index>> associate(const Trajectory& est, const Trajectory& gt,
                                               double max_dt, AssocStats* stats) {
  check_trajectory(est, "estimate");
  check_trajectory(gt, "ground-truth");

  std::vector<std::pair<Index, Index>> pairs;
  size_t j = 0;
  for (size_t i = 0; i < est.size(); ++i) {
    const double t = est[i].timestamp;
    while (j + 1 < gt.size() &&
           std::abs(gt[j + 1].timestamp - t) <= std::abs(gt[j].timestamp - t)) {
      ++j;
    }
    if (std::abs(gt[j].timestamp - t) <= max_dt) {
      pairs.emplace_back(static_cast<Index>(i), static_cast<Index>(j));
    }
  }
  if (stats) {
    stats->matched = pairs.size();
    stats->dropped_est = est.size() - pairs.size();
    std::vector<bool> used(gt.size(), false);
    for (const auto& p : pairs) used[static_cast<size_t>(p.second)] = true;
    stats->dropped_gt = static_cast<size_t>(std::count(used.begin(), used.end(), false));
  }
  if (pairs.empty()) fail("zero-pairs", "no timestamp matches within max_dt");
  return pairs;
}

Pose umeyama_se3(const std::vector<Vec3>& est, const std::vector<Vec3>& gt) {
  if (est.size() != gt.size()) fail("shape-mismatch", "alignment point sets differ in size");
  const size_t n = est.size();
  if (n < 3) fail("degenerate-alignment", "alignment needs at least 3 point pairs");

  Vec3 mu_est = Vec3::Zero(), mu_gt = Vec3::Zero();
  for (size_t k = 0; k < n; ++k) {
    mu_est += est[k];
    mu_gt += gt[k];
  }
  mu_est /= static_cast<double>(n);
  mu_gt /= static_cast<double>(n);

  Mat3 sigma = Mat3::Zero();
  double spread = 0;
  for (size_t k = 0; k < n; ++k) {
    sigma += (gt[k] - mu_gt) * (est[k] - mu_est).transpose();
    spread = std::max(spread, (est[k] - mu_est).squaredNorm());
  }
  sigma /= static_cast<double>(n);

  Eigen::JacobiSVD<Mat3> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  // Collinear or coincident points leave the rotation about the point axis
  // unconstrained.
  if (sv[1] <= 1e-12 * std::max(sv[0], std::sqrt(spread))) {
    fail("degenerate-alignment", "point configuration is collinear or coincident");
  }
  Mat3 s = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) s(2, 2) = -1.0;
  Pose out;
  out.rotation = svd.matrixU() * s * svd.matrixV().transpose();
  out.translation = mu_gt - out.rotation * mu_est;
  return out;
}

double ape_rmse(const Trajectory& est, const Trajectory& gt, double max_dt) {
  return evaluate(est, gt, 0.0, max_dt).ape_rmse;
}

double rpe_rmse(const Trajectory& est, const Trajectory& gt, double interval_m,
                double max_dt) {
  EvalReport r = evaluate(est, gt, interval_m, max_dt);
  return r.rpe_rmse;
}

EvalReport evaluate(const Trajectory& est, const Trajectory& gt, double interval_m,
                    double max_dt) {
  const AlignedPairs pairs = paired_positions(est, gt, max_dt);

  EvalReport report;
  report.pairs = pairs.est.size();
  report.rpe_interval = interval_m;
  report.alignment = umeyama_se3(pairs.est, pairs.gt);

  double sq_sum = 0;
  report.ape_residuals.reserve(pairs.est.size());
  for (size_t k = 0; k < pairs.est.size(); ++k) {
    const double err = (report.alignment * pairs.est[k] - pairs.gt[k]).norm();
    report.ape_residuals.push_back(err);
    sq_sum += err * err;
  }
  report.ape_rmse = std::sqrt(sq_sum / static_cast<double>(pairs.est.size()));

  if (interval_m <= 0) return report;

  // Cumulative ground-truth arc length over the associated pairs.
  const size_t n = pairs.index_pairs.size();
  std::vector<double> arc(n, 0.0);
  for (size_t k = 1; k < n; ++k) {
    arc[k] = arc[k - 1] + (pairs.gt[k] - pairs.gt[k - 1]).norm();
  }
  if (arc.back() < interval_m) {
    fail("path-too-short", "ground-truth path is shorter than the RPE interval");
  }

  double rpe_sq = 0;
  size_t count = 0;
  size_t j = 0;
  for (size_t i = 0; i < n; ++i) {
    if (j < i + 1) j = i + 1;
    while (j < n && arc[j] - arc[i] < interval_m) ++j;
    if (j >= n) break;
    const auto& est_i = est[static_cast<size_t>(pairs.index_pairs[i].first)].pose;
    const auto& est_j = est[static_cast<size_t>(pairs.index_pairs[j].first)].pose;
    const auto& gt_i = gt[static_cast<size_t>(pairs.index_pairs[i].second)].pose;
    const auto& gt_j = gt[static_cast<size_t>(pairs.index_pairs[j].second)].pose;
    const Pose rel_err = (gt_i.inverse() * gt_j).inverse() * (est_i.inverse() * est_j);
    const double err = rel_err.translation.norm();
    report.rpe_residuals.push_back(err);
    rpe_sq += err * err;
    ++count;
  }
  if (count == 0) fail("path-too-short", "no interval pairs found");
  report.rpe_pairs = count;
  report.rpe_rmse = std::sqrt(rpe_sq / static_cast<double>(count));
  return report;
}

}  // namespace rio
