#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rio/core.hpp"

namespace rio {

struct LogVarClamp {
  double lo = -10.0;
  double hi = 4.0;
};

/// Mean Gaussian negative log-likelihood in nats:
/// mean over i of (est - gt)^2 / (2 sigma^2) + log(sigma^2) / 2 with
/// sigma^2 = exp(clamped logvar). squared_residual=false evaluates the
/// unsquared variant for fidelity experiments.
double nll(std::span<const double> est, std::span<const double> gt,
           std::span<const double> logvar, const LogVarClamp& clamp = {},
           bool squared_residual = true);

struct ZStats {
  double mean = 0;
  double variance = 0;              // population variance of z
  std::array<double, 3> coverage{}; // fraction of |z| <= 1, 2, 3
  size_t count = 0;
};

/// Normalized-residual statistics for (residual, sigma) pairs, z = r / sigma.
ZStats z_stats(std::span<const std::pair<double, double>> errors);

struct CalibrationReport {
  double mean_nll = 0;
  ZStats overall;
  std::vector<ZStats> per_axis;  // empty, or one entry per velocity axis
  size_t count = 0;
};

}  // namespace rio
