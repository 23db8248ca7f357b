#pragma once

#include <cstddef>
#include <vector>

#include "msfilter/filter.hpp"

namespace msfilter {

struct SmoothedProbabilities {
  std::vector<std::vector<double>> history_probs;  // per period, over that period's histories
  std::vector<Vector> regime_probs;                // per period, length h
  /// Backward steps where a needed predictive normaliser was zero; those
  /// terms contribute nothing.
  std::size_t zero_denominators = 0;
};

/// Backward recursion for Pr[H_t | Y_n], started from the filtered regime
/// marginals at t = n:
///   mu_{t|n}(H_t) = sum_{s'} mu_{t+1|n}(s') mu_{t|t}(H_t) Q(s_t, s') / sum_{H} Q(s_H, s') mu_{t|t}(H)
SmoothedProbabilities smooth_probabilities(const FilterRun& run, const MarkovChain& chain);

/// Per-history backward information recursion. With L = T_{s'} (I - K Z),
///   r_t = Z' F^-1 v + sum_{s'} Q(s_t, s') L' r_{t+1}(succ(H_t, s'))
///   N_t = Z' F^-1 Z + sum_{s'} Q(s_t, s') L' N_{t+1}(succ(H_t, s')) L
///   alpha_{t|n} = alpha_{t|t-1} + P_{t|t-1} r_t,  P_{t|n} = P_{t|t-1} - P_{t|t-1} N_t P_{t|t-1}
/// where succ drops the oldest regime of H_t (if the depth is full) and
/// appends s'. Requires a run filtered with retention.
std::vector<std::vector<GaussianBelief>> smooth_states(const FilterRun& run, const MSStateSpace& model);

struct SmootherRun {
  std::vector<std::vector<double>> history_probs;
  std::vector<Vector> regime_probs;
  std::vector<Vector> means;
  std::vector<Matrix> covs;
  std::vector<std::vector<GaussianBelief>> histories;
  std::size_t zero_denominators = 0;

  int periods() const { return static_cast<int>(means.size()); }
};

/// Both passes, merged with the smoothed history probabilities:
///   x_{t|n} = sum mu_{t|n}(H) alpha_{t|n}(H),  P_{t|n} = sum mu_{t|n}(H) P_{t|n}(H).
SmootherRun smooth_run(const FilterRun& run, const MSStateSpace& model);

}  // namespace msfilter
