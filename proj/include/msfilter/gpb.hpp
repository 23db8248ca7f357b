#pragma once

#include <optional>

#include "msfilter/filter.hpp"

namespace msfilter {

/// GPB(N) prior. Paper warm-up gives h^{N-1} collapsed histories sharing the
/// default belief with chain-stationary weights; growing warm-up gives a single
/// depth-0 history. An explicit `init` is validated and returned unchanged.
HistoryPosterior gpb_init(const MSStateSpace& model, int order, Warmup warmup = Warmup::kPaper,
                          const std::optional<HistoryPosterior>& init = std::nullopt);

/// Moment-matched merge over the oldest regimes, down to histories of `depth`.
HistoryPosterior gpb_collapse(const HistoryPosterior& expanded, int depth);

/// One period: expand every collapsed history by every current regime, run
/// the Kalman kernel per history, weight by likelihood x Q(s_{t-1}, s_t) x
/// prior weight, collapse the oldest regime away and fuse.
FilterStepOutput gpb_step(const HistoryPosterior& prior, const Eigen::Ref<const Vector>& y,
                          const MSStateSpace& model, int order, bool retain = false);

FilterRun gpb_run(const MSStateSpace& model, const ObservationSeries& data, int order,
                  const FilterOptions& options = {});

}  // namespace msfilter
