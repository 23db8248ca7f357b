#include "msfilter/exact.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "msfilter/error.hpp"
#include "msfilter/lyapunov.hpp"

namespace msfilter {

namespace {

struct Branch {
  GaussianBelief belief;
  double log_weight = 0.0;
  int last = -1;
};

}  // namespace

ExactRun exact_run(const MSStateSpace& model, const ObservationSeries& data, const ExactOptions& options) {
  validate_observations(data, model);
  const int h = model.h();
  const int n = data.periods();
  history_count(h, n, options.cap);  // throws when the mixture would be too large

  const Vector start = options.initial_regime_probs.value_or(stationary_distribution(model.chain));
  if (start.size() != h) throw Error(ErrorCode::kDimensionMismatch, "initial regime probabilities need h entries");
  const GaussianBelief initial = options.initial_belief.value_or(default_initial_belief(model, start));

  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<Branch> branches{{initial, 0.0, -1}};

  ExactRun run;
  run.steps.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    const Vector y = data.y.row(t).transpose();
    std::vector<Branch> next;
    next.reserve(branches.size() * static_cast<std::size_t>(h));
    double shift = neg_inf;
    for (const Branch& parent : branches) {
      for (int s = 0; s < h; ++s) {
        double transition = 0.0;
        if (parent.last < 0) {
          for (int i = 0; i < h; ++i) transition += start(i) * model.chain.Q(i, s);
        } else {
          transition = model.chain.Q(parent.last, s);
        }
        const RegimeParams& params = model.regime(s);
        KalmanUpdate upd = kf_update(kf_forecast(parent.belief, params), y, params);
        Branch child{std::move(upd.posterior), neg_inf, s};
        if (transition > 0.0 && parent.log_weight > neg_inf) {
          child.log_weight = parent.log_weight + std::log(transition) + upd.stats.loglik;
        }
        shift = std::max(shift, child.log_weight);
        next.push_back(std::move(child));
      }
    }
    if (!std::isfinite(shift)) {
      throw Error(ErrorCode::kUnderflow, "period " + std::to_string(t + 1) + ": all histories have zero weight");
    }

    double total = 0.0;
    for (const Branch& b : next) total += std::exp(b.log_weight - shift);
    const double log_total = shift + std::log(total);

    ExactStep step;
    step.loglik_increment = log_total;
    step.weights.resize(next.size());
    step.regime_marginals = Vector::Zero(h);
    step.fused_mean = Vector::Zero(model.dims.m);
    for (std::size_t k = 0; k < next.size(); ++k) {
      next[k].log_weight -= log_total;
      const double w = std::exp(next[k].log_weight);
      step.weights[k] = w;
      step.regime_marginals(next[k].last) += w;
      step.fused_mean += w * next[k].belief.mean;
    }
    step.fused_cov = Matrix::Zero(model.dims.m, model.dims.m);
    for (std::size_t k = 0; k < next.size(); ++k) {
      const Vector d = next[k].belief.mean - step.fused_mean;
      step.fused_cov += step.weights[k] * (next[k].belief.cov + d * d.transpose());
    }
    run.total_loglik += log_total;
    run.steps.push_back(std::move(step));
    branches = std::move(next);
  }
  return run;
}

}  // namespace msfilter
