#include "msfilter/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <thread>

#include "msfilter/error.hpp"
#include "msfilter/metrics.hpp"
#include "msfilter/simulate.hpp"
#include "msfilter/smoother.hpp"

namespace msfilter {

namespace {

struct AlgoSample {
  Vector state_updated, state_smoothed, prob_updated, prob_smoothed;
  double seconds_updating = 0.0;
  double seconds_total = 0.0;
};

struct SeedResult {
  bool ok = false;
  std::string message;
  std::vector<AlgoSample> algos;
};

Matrix stack(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  Matrix out(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return out;
}

Matrix rows_to_matrix(const std::vector<Vector>& rows, Eigen::Index cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t t = 0; t < rows.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = rows[t].transpose();
  return out;
}

SeedResult run_seed(const MSStateSpace& model, const CampaignConfig& config, std::uint64_t seed,
                    const Vector& normalizer) {
  using Clock = std::chrono::steady_clock;
  SeedResult result;
  try {
    const SimOutput sim = simulate(model, config.n, seed);
    const ObservationSeries data{sim.observations};
    const Matrix prob_truth = regime_indicators(sim.regimes, model.h());
    const Eigen::Index m = model.dims.m;
    const Eigen::Index h = model.h();

    for (const AlgoTag& tag : config.algorithms) {
      AlgoSample sample;
      FilterOptions options;
      options.warmup = config.warmup;
      options.retain_for_smoothing = config.smooth;

      const auto t0 = Clock::now();
      const FilterRun run = run_filter(model, data, tag, options);
      const auto t1 = Clock::now();
      sample.seconds_updating = std::chrono::duration<double>(t1 - t0).count();

      std::vector<Vector> means, probs;
      means.reserve(run.steps.size());
      probs.reserve(run.steps.size());
      for (const auto& step : run.steps) {
        means.push_back(step.fused_mean);
        probs.push_back(step.regime_marginals);
      }
      sample.state_updated = rmse(rows_to_matrix(means, m), sim.states, normalizer);
      sample.prob_updated = rmse(rows_to_matrix(probs, h), prob_truth);

      if (config.smooth) {
        const auto t2 = Clock::now();
        const SmootherRun smoothed = smooth_run(run, model);
        const auto t3 = Clock::now();
        sample.seconds_total = sample.seconds_updating + std::chrono::duration<double>(t3 - t2).count();
        sample.state_smoothed = rmse(rows_to_matrix(smoothed.means, m), sim.states, normalizer);
        sample.prob_smoothed = rmse(rows_to_matrix(smoothed.regime_probs, h), prob_truth);
      }
      result.algos.push_back(std::move(sample));
    }
    result.ok = true;
  } catch (const std::exception& e) {
    result.message = e.what();
  }
  return result;
}

}  // namespace

MetricReport monte_carlo(const MSStateSpace& model, const CampaignConfig& config) {
  if (config.algorithms.empty()) throw Error(ErrorCode::kInvalidArgument, "campaign lists no algorithms");
  if (config.n < 1 || config.n_sims < 1) {
    throw Error(ErrorCode::kInvalidArgument, "campaign needs n >= 1 and n_sims >= 1");
  }
  const Eigen::Index m = model.dims.m;
  const Vector normalizer = config.normalizer.value_or(Vector::Ones(m));
  if (normalizer.size() != m) throw Error(ErrorCode::kDimensionMismatch, "normalizer must have length m");
  if ((normalizer.array() == 0.0).any()) throw Error(ErrorCode::kZeroNormalizer, "normalizer has a zero entry");

  const auto sims = static_cast<std::size_t>(config.n_sims);
  std::vector<SeedResult> results(sims);
  const int threads = std::clamp(config.threads, 1, config.n_sims);
  if (threads == 1) {
    for (std::size_t i = 0; i < sims; ++i) results[i] = run_seed(model, config, config.seed_base + i, normalizer);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (int w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < sims; i = next++) {
          results[i] = run_seed(model, config, config.seed_base + i, normalizer);
        }
      });
    }
  }

  MetricReport report;
  report.n = config.n;
  report.n_sims = config.n_sims;
  report.seed_base = config.seed_base;
  report.warmup = config.warmup;
  report.smoothed = config.smooth;

  const std::size_t algos = config.algorithms.size();
  std::vector<std::vector<Vector>> su(algos), ss(algos), pu(algos), ps(algos);
  std::vector<double> t_upd(algos, 0.0), t_all(algos, 0.0);
  for (std::size_t i = 0; i < sims; ++i) {
    const SeedResult& r = results[i];
    if (!r.ok) {
      report.failed_seeds.push_back(config.seed_base + i);
      report.failure_messages.push_back(r.message);
      continue;
    }
    for (std::size_t a = 0; a < algos; ++a) {
      su[a].push_back(r.algos[a].state_updated);
      pu[a].push_back(r.algos[a].prob_updated);
      if (config.smooth) {
        ss[a].push_back(r.algos[a].state_smoothed);
        ps[a].push_back(r.algos[a].prob_smoothed);
      }
      t_upd[a] += r.algos[a].seconds_updating;
      t_all[a] += r.algos[a].seconds_total;
    }
  }
  const std::size_t ok = sims - report.failed_seeds.size();
  if (ok == 0) {
    throw Error(ErrorCode::kInvalidArgument, "every simulation failed; first error: " + report.failure_messages.front());
  }

  RmseTable upd_table, smo_table;
  for (std::size_t a = 0; a < algos; ++a) {
    AlgoMetrics metrics;
    metrics.tag = config.algorithms[a];
    metrics.state_rmse_updated = stack(su[a]);
    metrics.prob_rmse_updated = stack(pu[a]);
    metrics.mean_state_updated = mean_rmse(su[a]);
    metrics.mean_prob_updated = mean_rmse(pu[a]);
    metrics.seconds_updating = t_upd[a] / static_cast<double>(ok);
    upd_table.emplace_back(metrics.tag.name(), metrics.mean_state_updated);
    if (config.smooth) {
      metrics.state_rmse_smoothed = stack(ss[a]);
      metrics.prob_rmse_smoothed = stack(ps[a]);
      metrics.mean_state_smoothed = mean_rmse(ss[a]);
      metrics.mean_prob_smoothed = mean_rmse(ps[a]);
      metrics.improvement_state = improvement(metrics.mean_state_updated, metrics.mean_state_smoothed);
      metrics.improvement_prob = improvement(metrics.mean_prob_updated, metrics.mean_prob_smoothed);
      metrics.seconds_updating_smoothing = t_all[a] / static_cast<double>(ok);
      smo_table.emplace_back(metrics.tag.name(), metrics.mean_state_smoothed);
    }
    report.algorithms.push_back(std::move(metrics));
  }
  const RmseTable rel_upd = relative_rmse(upd_table);
  for (std::size_t a = 0; a < algos; ++a) report.algorithms[a].relative_state_updated = rel_upd[a].second;
  if (config.smooth) {
    const RmseTable rel_smo = relative_rmse(smo_table);
    for (std::size_t a = 0; a < algos; ++a) report.algorithms[a].relative_state_smoothed = rel_smo[a].second;
  }
  return report;
}

}  // namespace msfilter
