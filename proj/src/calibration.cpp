#include "rio/calibration.hpp"

#include <algorithm>
#include <cmath>

namespace rio {

double nll(std::span<const double> est, std::span<const double> gt,
           std::span<const double> logvar, const LogVarClamp& clamp, bool squared_residual) {
  if (est.size() != gt.size() || est.size() != logvar.size()) {
    fail("shape-mismatch", "nll inputs must have equal length");
  }
  if (est.empty()) fail("empty-input", "nll over zero elements");
  double sum = 0;
  for (size_t i = 0; i < est.size(); ++i) {
    const double lv = std::clamp(logvar[i], clamp.lo, clamp.hi);
    const double sigma2 = std::exp(lv);
    const double r = est[i] - gt[i];
    sum += (squared_residual ? r * r : r) / (2.0 * sigma2) + 0.5 * lv;
  }
  return sum / static_cast<double>(est.size());
}

ZStats z_stats(std::span<const std::pair<double, double>> errors) {
  if (errors.empty()) fail("empty-input", "z_stats over zero samples");
  ZStats stats;
  stats.count = errors.size();
  double sum = 0, sum_sq = 0;
  for (const auto& [residual, sigma] : errors) {
    if (!(sigma > 0)) fail("invalid-argument", "z_stats sigma must be positive");
    const double z = residual / sigma;
    sum += z;
    sum_sq += z * z;
    const double az = std::abs(z);
    for (int k = 0; k < 3; ++k) {
      if (az <= static_cast<double>(k + 1)) stats.coverage[static_cast<size_t>(k)] += 1.0;
    }
  }
  const double n = static_cast<double>(stats.count);
  stats.mean = sum / n;
  stats.variance = std::max(sum_sq / n - stats.mean * stats.mean, 0.0);
  for (auto& c : stats.coverage) c /= n;
  return stats;
}

}  // namespace rio
