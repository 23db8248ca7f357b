#include "msfilter/imm.hpp"

#include <algorithm>
#include <string>

#include "msfilter/error.hpp"
#include "msfilter/mixture.hpp"

namespace msfilter {

std::size_t MixingWeights::flagged_count() const {
  return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), true));
}

Matrix MixingWeights::dense() const {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(targets()), static_cast<Eigen::Index>(sources));
  for (std::size_t target = 0; target < targets(); ++target) {
    for (const auto& entry : rows[target]) {
      out(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(entry.source)) = entry.prob;
    }
  }
  return out;
}

MixingWeights imm_mixing_probs(std::span<const double> weights, const TransitionKernel& kernel) {
  if (weights.size() != kernel.sources()) {
    throw Error(ErrorCode::kDimensionMismatch, "mixing: weight count does not match kernel sources");
  }
  MixingWeights out;
  out.sources = kernel.sources();
  out.rows.resize(kernel.targets());
  out.predicted.resize(kernel.targets());
  out.flagged.assign(kernel.targets(), false);

  for (std::size_t target = 0; target < kernel.targets(); ++target) {
    const auto& candidates = kernel.row(target);
    double total = 0.0;
    for (const auto& entry : candidates) total += entry.prob * weights[entry.source];
    out.predicted[target] = total;
    if (!(total > 0.0)) {
      out.flagged[target] = true;
      continue;
    }
    auto& row = out.rows[target];
    row.reserve(candidates.size());
    for (const auto& entry : candidates) {
      row.push_back({entry.source, entry.prob * weights[entry.source] / total});
    }
  }
  return out;
}

MixingWeights imm_mixing_probs(std::span<const double> weights, const Matrix& grand, int h) {
  int depth = 0;
  for (std::size_t size = 1; size < static_cast<std::size_t>(grand.rows()); size *= static_cast<std::size_t>(h)) {
    ++depth;
  }
  return imm_mixing_probs(weights, TransitionKernel::from_dense(grand, h, depth));
}

std::vector<GaussianBelief> imm_mix(std::span<const GaussianBelief> beliefs,
                                    std::span<const double> weights, const MixingWeights& mixing) {
  std::vector<GaussianBelief> mixed;
  mixed.reserve(mixing.targets());
  std::vector<WeightedBelief> parts;
  for (std::size_t target = 0; target < mixing.targets(); ++target) {
    parts.clear();
    if (mixing.flagged[target]) {
      for (std::size_t source = 0; source < beliefs.size(); ++source) {
        parts.push_back({weights[source], &beliefs[source]});
      }
    } else {
      for (const auto& entry : mixing.rows[target]) parts.push_back({entry.prob, &beliefs[entry.source]});
    }
    mixed.push_back(moment_match(parts));
  }
  return mixed;
}

HistoryPosterior imm_init(const MSStateSpace& model, int order, Warmup warmup,
                          const std::optional<HistoryPosterior>& init) {
  if (order < 1) throw Error(ErrorCode::kInvalidArgument, "IMM order must be >= 1");
  const int depth = warmup == Warmup::kPaper ? order : 0;
  if (init) {
    check_posterior(*init, model, depth);
    return *init;
  }
  return default_posterior(model, depth);
}

TransitionKernel imm_kernel(const MSStateSpace& model, const HistoryPosterior& prior, int order) {
  return TransitionKernel::between(model.chain, prior.depth, std::min(prior.depth + 1, order),
                                   prior.regime_probs);
}

FilterStepOutput imm_step(const HistoryPosterior& prior, const Eigen::Ref<const Vector>& y,
                          const MSStateSpace& model, const TransitionKernel& kernel, bool retain) {
  const int h = model.h();
  const MixingWeights mixing = imm_mixing_probs(prior.weights, kernel);
  const std::vector<GaussianBelief> mixed = imm_mix(prior.beliefs, prior.weights, mixing);

  std::vector<const GaussianBelief*> priors(mixed.size());
  for (std::size_t k = 0; k < mixed.size(); ++k) priors[k] = &mixed[k];
  auto branches = detail::update_branches(priors, mixing.predicted, h, y, model, retain);

  FilterStepOutput out;
  out.posterior.regimes = h;
  out.posterior.depth = kernel.target_depth();
  out.posterior.beliefs = std::move(branches.updated);
  out.posterior.weights = branches.weights;
  out.posterior.regime_probs = newest_regime_marginals(branches.weights, h);

  Fused fused = fuse(out.posterior);
  out.history_depth = kernel.target_depth();
  out.history_weights = std::move(branches.weights);
  out.fused_mean = std::move(fused.mean);
  out.fused_cov = std::move(fused.cov);
  out.regime_marginals = std::move(fused.regime_marginals);
  out.loglik_increment = branches.loglik;
  out.records = std::move(branches.records);
  out.flagged_targets = mixing.flagged_count();
  return out;
}

FilterRun imm_run(const MSStateSpace& model, const ObservationSeries& data, int order,
                  const FilterOptions& options) {
  validate_observations(data, model);
  FilterRun run;
  run.tag = {Family::kImm, order};
  run.warmup = options.warmup;
  run.retained = options.retain_for_smoothing;
  run.steps.reserve(static_cast<std::size_t>(data.periods()));

  HistoryPosterior state = imm_init(model, order, options.warmup, options.init);
  std::optional<TransitionKernel> kernel;
  for (int t = 0; t < data.periods(); ++t) {
    // depth-0 kernels depend on the carried regime distribution
    if (!kernel || kernel->source_depth() != state.depth || state.depth == 0) {
      kernel = imm_kernel(model, state, order);
    }
    try {
      run.steps.push_back(imm_step(state, data.y.row(t).transpose(), model, *kernel, options.retain_for_smoothing));
    } catch (const Error& err) {
      throw Error(err.code(), "period " + std::to_string(t + 1) + ": " + err.what());
    }
    run.total_loglik += run.steps.back().loglik_increment;
    state = run.steps.back().posterior;
  }
  return run;
}

}  // namespace msfilter
