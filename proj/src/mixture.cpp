#include "msfilter/mixture.hpp"

#include "msfilter/error.hpp"

namespace msfilter {

GaussianBelief moment_match(std::span<const WeightedBelief> parts) {
  if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "moment_match: empty mixture");

  double total = 0.0;
  for (const auto& part : parts) total += part.weight;
  const bool uniform = !(total > 0.0);
  const double scale = uniform ? 1.0 / static_cast<double>(parts.size()) : 1.0 / total;
  auto weight_of = [&](const WeightedBelief& part) { return uniform ? scale : part.weight * scale; };

  if (parts.size() == 1) return *parts.front().belief;

  const Eigen::Index m = parts.front().belief->mean.size();
  GaussianBelief out{Vector::Zero(m), Matrix::Zero(m, m)};
  for (const auto& part : parts) out.mean.noalias() += weight_of(part) * part.belief->mean;
  for (const auto& part : parts) {
    const double w = weight_of(part);
    if (w == 0.0) continue;
    const Vector spread = part.belief->mean - out.mean;
    out.cov.noalias() += w * part.belief->cov;
    out.cov.noalias() += w * spread * spread.transpose();
  }
  symmetrize(out.cov);
  return out;
}

}  // namespace msfilter
