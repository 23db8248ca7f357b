#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msfilter/model.hpp"

namespace msfilter {

/// Per-column sqrt(mean_t ((est - truth) / normalizer)^2).
Vector rmse(const Matrix& estimates, const Matrix& truth, const Vector& normalizer);
Vector rmse(const Matrix& estimates, const Matrix& truth);

/// Arithmetic mean of per-sample RMSE vectors.
Vector mean_rmse(std::span<const Vector> samples);

using RmseTable = std::vector<std::pair<std::string, Vector>>;

/// Divides each variable's RMSE by the lowest across algorithms. The best
/// algorithm scores exactly 1; a variable where the best RMSE is 0 gives 1 for
/// every zero entry and +inf otherwise.
RmseTable relative_rmse(const RmseTable& table);

/// 1 - smoothed / updated, per variable.
Vector improvement(const Vector& updated, const Vector& smoothed);

/// n x h matrix of regime indicators, the truth for probability RMSEs.
Matrix regime_indicators(const std::vector<int>& regimes, int h);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap interval for the mean of `samples`.
Interval bootstrap_mean_interval(std::span<const double> samples, double level, int resamples,
                                 std::uint64_t seed);

}  // namespace msfilter
