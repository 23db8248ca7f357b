#include "msfilter/smoother.hpp"

#include <string>

#include "msfilter/error.hpp"

namespace msfilter {

SmoothedProbabilities smooth_probabilities(const FilterRun& run, const MarkovChain& chain) {
  const int n = run.periods();
  const int h = chain.regimes();
  SmoothedProbabilities out;
  if (n == 0) return out;
  out.history_probs.resize(static_cast<std::size_t>(n));
  out.regime_probs.resize(static_cast<std::size_t>(n));

  const auto& last = run.steps.back();
  out.history_probs.back() = last.history_weights;
  out.regime_probs.back() = newest_regime_marginals(last.history_weights, h);

  for (int t = n - 2; t >= 0; --t) {
    const auto idx = static_cast<std::size_t>(t);
    const std::vector<double>& filtered = run.steps[idx].history_weights;
    const Vector& ahead = out.regime_probs[idx + 1];

    Vector predictive = Vector::Zero(h);  // Pr[s_{t+1} | Y_t]
    for (std::size_t k = 0; k < filtered.size(); ++k) {
      const int s = newest_regime(k, h);
      for (int next = 0; next < h; ++next) predictive(next) += chain.Q(s, next) * filtered[k];
    }
    Vector ratio = Vector::Zero(h);
    for (int next = 0; next < h; ++next) {
      if (predictive(next) > 0.0) {
        ratio(next) = ahead(next) / predictive(next);
      } else if (ahead(next) > 0.0) {
        ++out.zero_denominators;
      }
    }

    std::vector<double>& smoothed = out.history_probs[idx];
    smoothed.resize(filtered.size());
    double total = 0.0;
    for (std::size_t k = 0; k < filtered.size(); ++k) {
      const int s = newest_regime(k, h);
      double acc = 0.0;
      for (int next = 0; next < h; ++next) acc += ratio(next) * chain.Q(s, next);
      smoothed[k] = filtered[k] * acc;
      total += smoothed[k];
    }
    if (total > 0.0 && total != 1.0) {
      for (double& p : smoothed) p /= total;
    }
    out.regime_probs[idx] = newest_regime_marginals(smoothed, h);
  }
  return out;
}

std::vector<std::vector<GaussianBelief>> smooth_states(const FilterRun& run, const MSStateSpace& model) {
  if (!run.retained) {
    throw Error(ErrorCode::kMissingRetention, "state smoothing needs a filter run with retained predictions");
  }
  const int n = run.periods();
  const int h = model.h();
  const auto hh = static_cast<std::size_t>(h);
  std::vector<std::vector<GaussianBelief>> out(static_cast<std::size_t>(n));
  if (n == 0) return out;

  std::vector<Vector> r_next;
  std::vector<Matrix> n_next;
  std::vector<Vector> r_cur;
  std::vector<Matrix> n_cur;
  for (int t = n - 1; t >= 0; --t) {
    const FilterStepOutput& step = run.steps[static_cast<std::size_t>(t)];
    const std::size_t count = step.records.size();
    if (count != step.history_weights.size()) {
      throw Error(ErrorCode::kMissingRetention, "period " + std::to_string(t + 1) + " has no retained records");
    }
    r_cur.assign(count, Vector());
    n_cur.assign(count, Matrix());

    std::size_t tail = 0;
    if (t < n - 1) {
      const int next_depth = run.steps[static_cast<std::size_t>(t) + 1].history_depth;
      tail = history_count(h, next_depth - 1);
    }

    for (std::size_t k = 0; k < count; ++k) {
      const HistoryRecord& rec = step.records[k];
      if (t == n - 1) {
        r_cur[k] = rec.r_seed;
        n_cur[k] = rec.n_seed;
        continue;
      }
      const int s = newest_regime(k, h);
      const std::size_t base = (k % tail) * hh;
      const Eigen::Index m = rec.pred_mean.size();
      Vector t_r = Vector::Zero(m);   // sum Q T' r_{t+1}
      Matrix t_nt = Matrix::Zero(m, m);  // sum Q T' N_{t+1} T
      for (int next = 0; next < h; ++next) {
        const double q = model.chain.Q(s, next);
        if (q == 0.0) continue;
        const Matrix& T = model.regime(next).T;
        const std::size_t succ = base + static_cast<std::size_t>(next);
        t_r.noalias() += q * (T.transpose() * r_next[succ]);
        t_nt.noalias() += q * (T.transpose() * n_next[succ] * T);
      }
      r_cur[k] = rec.r_seed;
      r_cur[k].noalias() += rec.gain_complement.transpose() * t_r;
      n_cur[k] = rec.n_seed;
      n_cur[k].noalias() += rec.gain_complement.transpose() * t_nt * rec.gain_complement;
      symmetrize(n_cur[k]);
    }

    auto& smoothed = out[static_cast<std::size_t>(t)];
    smoothed.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      const HistoryRecord& rec = step.records[k];
      GaussianBelief b;
      b.mean = rec.pred_mean + rec.pred_cov * r_cur[k];
      b.cov = rec.pred_cov - rec.pred_cov * n_cur[k] * rec.pred_cov;
      symmetrize(b.cov);
      smoothed.push_back(std::move(b));
    }
    std::swap(r_next, r_cur);
    std::swap(n_next, n_cur);
  }
  return out;
}

SmootherRun smooth_run(const FilterRun& run, const MSStateSpace& model) {
  SmoothedProbabilities probs = smooth_probabilities(run, model.chain);
  SmootherRun out;
  out.histories = smooth_states(run, model);
  out.zero_denominators = probs.zero_denominators;

  const Eigen::Index m = model.dims.m;
  const int n = run.periods();
  out.means.resize(static_cast<std::size_t>(n));
  out.covs.resize(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    const auto idx = static_cast<std::size_t>(t);
    Vector mean = Vector::Zero(m);
    Matrix cov = Matrix::Zero(m, m);
    const auto& weights = probs.history_probs[idx];
    for (std::size_t k = 0; k < weights.size(); ++k) {
      mean.noalias() += weights[k] * out.histories[idx][k].mean;
      cov.noalias() += weights[k] * out.histories[idx][k].cov;
    }
    out.means[idx] = std::move(mean);
    out.covs[idx] = std::move(cov);
  }
  out.history_probs = std::move(probs.history_probs);
  out.regime_probs = std::move(probs.regime_probs);
  return out;
}

}  // namespace msfilter
