#pragma once

#include <optional>
#include <span>
#include <vector>

#include "msfilter/filter.hpp"

namespace msfilter {

/// Conditional probabilities Pr[H_{t-1} | Y_{t-1}, H_t], one row per target
/// history. A target whose sources all carry zero prior mass keeps an empty
/// row and is flagged.
struct MixingWeights {
  std::size_t sources = 0;
  std::vector<std::vector<TransitionKernel::Entry>> rows;
  std::vector<double> predicted;  // Pr[H_t | Y_{t-1}], the row normalisers
  std::vector<bool> flagged;

  std::size_t targets() const { return rows.size(); }
  std::size_t flagged_count() const;
  /// targets x sources
  Matrix dense() const;
};

MixingWeights imm_mixing_probs(std::span<const double> weights, const TransitionKernel& kernel);
MixingWeights imm_mixing_probs(std::span<const double> weights, const Matrix& grand, int h);

/// Moment-matched prior belief for every target history. Flagged targets get
/// the prior-weighted average of all sources.
std::vector<GaussianBelief> imm_mix(std::span<const GaussianBelief> beliefs,
                                    std::span<const double> weights, const MixingWeights& mixing);

/// IMM(N) prior over h^N histories (paper warm-up) or one depth-0 history
/// (growing warm-up).
HistoryPosterior imm_init(const MSStateSpace& model, int order, Warmup warmup = Warmup::kPaper,
                          const std::optional<HistoryPosterior>& init = std::nullopt);

/// The kernel imm_step needs for a prior of the given depth.
TransitionKernel imm_kernel(const MSStateSpace& model, const HistoryPosterior& prior, int order);

FilterStepOutput imm_step(const HistoryPosterior& prior, const Eigen::Ref<const Vector>& y,
                          const MSStateSpace& model, const TransitionKernel& kernel,
                          bool retain = false);

FilterRun imm_run(const MSStateSpace& model, const ObservationSeries& data, int order,
                  const FilterOptions& options = {});

}  // namespace msfilter
