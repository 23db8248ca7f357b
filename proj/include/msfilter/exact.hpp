#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "msfilter/kalman.hpp"
#include "msfilter/model.hpp"

namespace msfilter {

/// One period of the full-history filter. `weights` covers all h^t histories
/// (s_1, ..., s_t), encoded base-h with s_t least significant.
struct ExactStep {
  std::vector<double> weights;
  Vector fused_mean;
  Matrix fused_cov;
  Vector regime_marginals;
  double loglik_increment = 0.0;
};

struct ExactRun {
  std::vector<ExactStep> steps;
  double total_loglik = 0.0;
};

struct ExactOptions {
  std::size_t cap = std::size_t{1} << 16;
  /// Defaults match the approximate filters: the stationary regime
  /// distribution and the shared default initial belief.
  std::optional<GaussianBelief> initial_belief;
  std::optional<Vector> initial_regime_probs;
};

/// Optimal filter over every regime history, no merging of any kind. Weights
/// follow Bayes' rule in the log domain. Throws kCapExceeded when h^n exceeds
/// the cap.
ExactRun exact_run(const MSStateSpace& model, const ObservationSeries& data,
                   const ExactOptions& options = {});

}  // namespace msfilter
