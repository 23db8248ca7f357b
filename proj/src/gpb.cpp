#include "msfilter/gpb.hpp"

#include <algorithm>
#include <string>

#include "msfilter/error.hpp"
#include "msfilter/mixture.hpp"

namespace msfilter {

HistoryPosterior gpb_init(const MSStateSpace& model, int order, Warmup warmup,
                          const std::optional<HistoryPosterior>& init) {
  if (order < 1) throw Error(ErrorCode::kInvalidArgument, "GPB order must be >= 1");
  const int depth = warmup == Warmup::kPaper ? order - 1 : 0;
  if (init) {
    check_posterior(*init, model, depth);
    return *init;
  }
  return default_posterior(model, depth);
}

HistoryPosterior gpb_collapse(const HistoryPosterior& expanded, int depth) {
  if (depth > expanded.depth || depth < 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot collapse to a deeper history set");
  }
  if (depth == expanded.depth) return expanded;

  const int h = expanded.regimes;
  const std::size_t kept = history_count(h, depth);
  const std::size_t dropped = expanded.size() / kept;

  HistoryPosterior out;
  out.regimes = h;
  out.depth = depth;
  out.beliefs.reserve(kept);
  out.weights.resize(kept);
  out.regime_probs = expanded.depth == 0 ? expanded.regime_probs
                                         : newest_regime_marginals(expanded.weights, h);

  std::vector<WeightedBelief> parts(dropped);
  for (std::size_t c = 0; c < kept; ++c) {
    double total = 0.0;
    for (std::size_t o = 0; o < dropped; ++o) {
      const std::size_t key = o * kept + c;
      parts[o] = {expanded.weights[key], &expanded.beliefs[key]};
      total += expanded.weights[key];
    }
    out.weights[c] = total;
    out.beliefs.push_back(moment_match(parts));
  }
  return out;
}

FilterStepOutput gpb_step(const HistoryPosterior& prior, const Eigen::Ref<const Vector>& y,
                          const MSStateSpace& model, int order, bool retain) {
  const int h = model.h();
  const int depth = prior.depth + 1;
  const auto kernel = TransitionKernel::between(model.chain, prior.depth, depth, prior.regime_probs);

  std::vector<const GaussianBelief*> priors(kernel.targets());
  std::vector<double> predicted(kernel.targets());
  for (std::size_t k = 0; k < kernel.targets(); ++k) {
    const auto& entry = kernel.row(k).front();
    priors[k] = &prior.beliefs[entry.source];
    predicted[k] = entry.prob * prior.weights[entry.source];
  }

  auto branches = detail::update_branches(priors, predicted, h, y, model, retain);

  HistoryPosterior expanded;
  expanded.regimes = h;
  expanded.depth = depth;
  expanded.beliefs = std::move(branches.updated);
  expanded.weights = branches.weights;
  expanded.regime_probs = newest_regime_marginals(expanded.weights, h);

  FilterStepOutput out;
  out.posterior = gpb_collapse(expanded, std::min(depth, order - 1));
  Fused fused = fuse(out.posterior);
  out.history_depth = depth;
  out.history_weights = std::move(branches.weights);
  out.fused_mean = std::move(fused.mean);
  out.fused_cov = std::move(fused.cov);
  out.regime_marginals = expanded.regime_probs;
  out.loglik_increment = branches.loglik;
  out.records = std::move(branches.records);
  return out;
}

FilterRun gpb_run(const MSStateSpace& model, const ObservationSeries& data, int order,
                  const FilterOptions& options) {
  validate_observations(data, model);
  FilterRun run;
  run.tag = {Family::kGpb, order};
  run.warmup = options.warmup;
  run.retained = options.retain_for_smoothing;
  run.steps.reserve(static_cast<std::size_t>(data.periods()));

  HistoryPosterior state = gpb_init(model, order, options.warmup, options.init);
  for (int t = 0; t < data.periods(); ++t) {
    try {
      run.steps.push_back(gpb_step(state, data.y.row(t).transpose(), model, order, options.retain_for_smoothing));
    } catch (const Error& err) {
      throw Error(err.code(), "period " + std::to_string(t + 1) + ": " + err.what());
    }
    run.total_loglik += run.steps.back().loglik_increment;
    state = run.steps.back().posterior;
  }
  return run;
}

}  // namespace msfilter
