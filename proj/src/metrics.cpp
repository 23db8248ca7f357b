#include "msfilter/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msfilter/error.hpp"
#include "msfilter/simulate.hpp"

namespace msfilter {

Vector rmse(const Matrix& estimates, const Matrix& truth, const Vector& normalizer) {
  if (estimates.rows() != truth.rows() || estimates.cols() != truth.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "rmse: estimates and truth differ in shape");
  }
  if (normalizer.size() != truth.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "rmse: normalizer length must equal the column count");
  }
  if ((normalizer.array() == 0.0).any()) {
    throw Error(ErrorCode::kZeroNormalizer, "rmse: normalizer has a zero entry");
  }
  if (truth.rows() == 0) throw Error(ErrorCode::kInvalidArgument, "rmse: no periods");
  const Matrix scaled = (estimates - truth).array().rowwise() / normalizer.transpose().array();
  return (scaled.array().square().colwise().sum() / static_cast<double>(truth.rows())).sqrt().transpose();
}

Vector rmse(const Matrix& estimates, const Matrix& truth) {
  return rmse(estimates, truth, Vector::Ones(truth.cols()));
}

Vector mean_rmse(std::span<const Vector> samples) {
  if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "mean_rmse: no samples");
  Vector total = Vector::Zero(samples.front().size());
  for (const Vector& s : samples) total += s;
  return total / static_cast<double>(samples.size());
}

RmseTable relative_rmse(const RmseTable& table) {
  if (table.empty()) throw Error(ErrorCode::kInvalidArgument, "relative_rmse: no algorithms");
  const Eigen::Index vars = table.front().second.size();
  Vector best = table.front().second;
  for (const auto& [name, values] : table) {
    if (values.size() != vars) throw Error(ErrorCode::kDimensionMismatch, "relative_rmse: ragged table");
    best = best.cwiseMin(values);
  }
  RmseTable out;
  out.reserve(table.size());
  for (const auto& [name, values] : table) {
    Vector ratio(vars);
    for (Eigen::Index i = 0; i < vars; ++i) {
      if (best(i) > 0.0) {
        ratio(i) = values(i) == best(i) ? 1.0 : values(i) / best(i);
      } else {
        ratio(i) = values(i) == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
      }
    }
    out.emplace_back(name, std::move(ratio));
  }
  return out;
}

Vector improvement(const Vector& updated, const Vector& smoothed) {
  if (updated.size() != smoothed.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "improvement: length mismatch");
  }
  return (1.0 - smoothed.array() / updated.array()).matrix();
}

Matrix regime_indicators(const std::vector<int>& regimes, int h) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(regimes.size()), h);
  for (std::size_t t = 0; t < regimes.size(); ++t) out(static_cast<Eigen::Index>(t), regimes[t]) = 1.0;
  return out;
}

Interval bootstrap_mean_interval(std::span<const double> samples, double level, int resamples,
                                 std::uint64_t seed) {
  if (samples.empty() || resamples < 1 || !(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bootstrap: need samples, resamples >= 1, level in (0, 1)");
  }
  Rng rng(seed, 7);
  const std::size_t n = samples.size();
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (double& mean : means) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
      acc += samples[std::min(pick, n - 1)];
    }
    mean = acc / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double tail = 0.5 * (1.0 - level);
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(means.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, means.size() - 1);
    return means[lo] + (pos - static_cast<double>(lo)) * (means[hi] - means[lo]);
  };
  return {at(tail), at(1.0 - tail)};
}

}  // namespace msfilter
