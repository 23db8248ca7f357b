#include "msfilter/filter.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "msfilter/error.hpp"
#include "msfilter/gpb.hpp"
#include "msfilter/imm.hpp"
#include "msfilter/lyapunov.hpp"
#include "msfilter/mixture.hpp"

namespace msfilter {

std::string_view to_string(Warmup warmup) {
  return warmup == Warmup::kPaper ? "paper" : "growing";
}

Warmup parse_warmup(std::string_view text) {
  if (text == "paper") return Warmup::kPaper;
  if (text == "growing") return Warmup::kGrowing;
  throw Error(ErrorCode::kInvalidArgument, "unknown warm-up mode '" + std::string(text) + "'");
}

std::string AlgoTag::name() const {
  return (family == Family::kGpb ? "gpb" : "imm") + std::to_string(order);
}

AlgoTag AlgoTag::parse(std::string_view text) {
  std::string lower;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  AlgoTag tag;
  if (lower.rfind("gpb", 0) == 0) {
    tag.family = Family::kGpb;
  } else if (lower.rfind("imm", 0) == 0) {
    tag.family = Family::kImm;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown filter '" + std::string(text) + "'");
  }
  const std::string digits = lower.substr(3);
  if (digits.empty()) {
    tag.order = 1;
  } else {
    if (!std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw Error(ErrorCode::kInvalidArgument, "bad filter order in '" + std::string(text) + "'");
    }
    tag.order = std::stoi(digits);
  }
  if (tag.order < 1) throw Error(ErrorCode::kInvalidArgument, "filter order must be >= 1");
  return tag;
}

Vector newest_regime_marginals(std::span<const double> weights, int h) {
  Vector marginals = Vector::Zero(h);
  for (std::size_t k = 0; k < weights.size(); ++k) marginals(newest_regime(k, h)) += weights[k];
  return marginals;
}

Fused fuse(const HistoryPosterior& posterior) {
  std::vector<WeightedBelief> parts;
  parts.reserve(posterior.size());
  for (std::size_t k = 0; k < posterior.size(); ++k) {
    parts.push_back({posterior.weights[k], &posterior.beliefs[k]});
  }
  GaussianBelief merged = moment_match(parts);
  Fused out;
  out.mean = std::move(merged.mean);
  out.cov = std::move(merged.cov);
  out.regime_marginals = posterior.depth == 0
                             ? posterior.regime_probs
                             : newest_regime_marginals(posterior.weights, posterior.regimes);
  return out;
}

TransitionKernel TransitionKernel::between(const MarkovChain& chain, int source_depth,
                                           int target_depth, const Vector& start_probs) {
  const int h = chain.regimes();
  const bool extend = target_depth == source_depth + 1;
  if (source_depth < 0 || !(extend || (target_depth == source_depth && source_depth >= 1))) {
    throw Error(ErrorCode::kInvalidArgument,
                "no transition kernel from depth " + std::to_string(source_depth) + " to depth " +
                    std::to_string(target_depth));
  }
  TransitionKernel kernel;
  kernel.h_ = h;
  kernel.source_depth_ = source_depth;
  kernel.target_depth_ = target_depth;
  kernel.sources_ = history_count(h, source_depth);
  const std::size_t targets = history_count(h, target_depth);
  const auto hh = static_cast<std::size_t>(h);
  kernel.rows_.resize(targets);

  if (extend) {
    for (std::size_t target = 0; target < targets; ++target) {
      const std::size_t source = target / hh;
      const int s = newest_regime(target, h);
      double prob = 0.0;
      if (source_depth == 0) {
        for (int i = 0; i < h; ++i) prob += start_probs(i) * chain.Q(i, s);
      } else {
        prob = chain.Q(newest_regime(source, h), s);
      }
      kernel.rows_[target] = {{source, prob}};
    }
    return kernel;
  }

  const std::size_t tail = kernel.sources_ / hh;  // h^{depth-1}
  for (std::size_t target = 0; target < targets; ++target) {
    const std::size_t overlap = target / hh;
    const int s = newest_regime(target, h);
    auto& row = kernel.rows_[target];
    row.reserve(hh);
    for (std::size_t oldest = 0; oldest < hh; ++oldest) {
      const std::size_t source = oldest * tail + overlap;
      row.push_back({source, chain.Q(newest_regime(source, h), s)});
    }
  }
  return kernel;
}

TransitionKernel TransitionKernel::from_dense(const Matrix& grand, int h, int depth) {
  const std::size_t size = history_count(h, depth);
  if (static_cast<std::size_t>(grand.rows()) != size || static_cast<std::size_t>(grand.cols()) != size) {
    throw Error(ErrorCode::kDimensionMismatch, "grand transition matrix must be h^N x h^N");
  }
  TransitionKernel kernel;
  kernel.h_ = h;
  kernel.source_depth_ = depth;
  kernel.target_depth_ = depth;
  kernel.sources_ = size;
  kernel.rows_.resize(size);
  for (std::size_t target = 0; target < size; ++target) {
    for (std::size_t source = 0; source < size; ++source) {
      const double prob = grand(static_cast<Eigen::Index>(source), static_cast<Eigen::Index>(target));
      if (prob != 0.0) kernel.rows_[target].push_back({source, prob});
    }
  }
  return kernel;
}

HistoryPosterior default_posterior(const MSStateSpace& model, int depth) {
  const int h = model.h();
  const Vector pi = stationary_distribution(model.chain);
  const GaussianBelief initial = default_initial_belief(model, pi);
  const std::size_t size = history_count(h, depth);

  HistoryPosterior out;
  out.regimes = h;
  out.depth = depth;
  out.beliefs.assign(size, initial);
  out.weights.resize(size);
  for (std::size_t k = 0; k < size; ++k) {
    const auto regimes = decode_history(k, h, depth);
    out.weights[k] = history_probability(regimes, model.chain, pi);
  }
  out.regime_probs = depth == 0 ? pi : newest_regime_marginals(out.weights, h);
  return out;
}

void check_posterior(const HistoryPosterior& posterior, const MSStateSpace& model, int depth) {
  const std::size_t size = history_count(model.h(), depth);
  if (posterior.regimes != model.h() || posterior.depth != depth || posterior.weights.size() != size ||
      posterior.beliefs.size() != size || posterior.regime_probs.size() != model.h()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "initial posterior must hold h^" + std::to_string(depth) + " = " + std::to_string(size) +
                    " histories for h = " + std::to_string(model.h()));
  }
  double total = 0.0;
  for (double w : posterior.weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "initial weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw Error(ErrorCode::kInvalidArgument, "initial weights sum to " + std::to_string(total));
  }
  const Eigen::Index m = model.dims.m;
  for (const auto& belief : posterior.beliefs) {
    if (belief.mean.size() != m || belief.cov.rows() != m || belief.cov.cols() != m) {
      throw Error(ErrorCode::kDimensionMismatch, "initial belief has the wrong state dimension");
    }
  }
}

FilterRun run_filter(const MSStateSpace& model, const ObservationSeries& data, const AlgoTag& tag,
                     const FilterOptions& options) {
  return tag.family == Family::kGpb ? gpb_run(model, data, tag.order, options)
                                    : imm_run(model, data, tag.order, options);
}

namespace detail {

BranchUpdate update_branches(std::span<const GaussianBelief* const> priors,
                             std::span<const double> predicted, int h,
                             const Eigen::Ref<const Vector>& y, const MSStateSpace& model,
                             bool retain) {
  const std::size_t count = priors.size();
  BranchUpdate out;
  out.updated.reserve(count);
  out.weights.resize(count);
  if (retain) out.records.reserve(count);

  std::vector<double> log_weights(count);
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < count; ++k) {
    const RegimeParams& params = model.regime(newest_regime(k, h));
    GaussianBelief pred = kf_forecast(*priors[k], params);
    KalmanUpdate upd = kf_update(pred, y, params);

    log_weights[k] = predicted[k] > 0.0 ? upd.stats.loglik + std::log(predicted[k])
                                        : -std::numeric_limits<double>::infinity();
    if (std::isnan(log_weights[k])) {
      throw Error(ErrorCode::kUnderflow, "history weight evaluated to NaN");
    }
    shift = std::max(shift, log_weights[k]);

    if (retain) {
      HistoryRecord rec;
      rec.pred_mean = std::move(pred.mean);
      rec.pred_cov = std::move(pred.cov);
      rec.upd_mean = upd.posterior.mean;
      rec.upd_cov = upd.posterior.cov;
      rec.r_seed = std::move(upd.stats.r_seed);
      rec.n_seed = std::move(upd.stats.n_seed);
      rec.gain_complement = std::move(upd.stats.gain_complement);
      out.records.push_back(std::move(rec));
    }
    out.updated.push_back(std::move(upd.posterior));
  }

  if (!std::isfinite(shift)) {
    throw Error(ErrorCode::kUnderflow, "every history has zero likelihood-weighted probability");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    out.weights[k] = std::exp(log_weights[k] - shift);
    total += out.weights[k];
  }
  for (double& w : out.weights) w /= total;
  out.loglik = shift + std::log(total);
  return out;
}

}  // namespace detail

}  // namespace msfilter
