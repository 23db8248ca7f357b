#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msfilter/filter.hpp"

namespace msfilter {

struct CampaignConfig {
  std::string model_path;
  int n = 1000;
  int n_sims = 100;
  std::vector<AlgoTag> algorithms;
  std::uint64_t seed_base = 1;
  std::optional<Vector> normalizer;  // per state; probabilities are never normalised
  Warmup warmup = Warmup::kPaper;
  bool smooth = true;
  int threads = 1;
};

struct AlgoMetrics {
  AlgoTag tag;
  /// Rows are successful simulations in seed order.
  Matrix state_rmse_updated;
  Matrix state_rmse_smoothed;
  Matrix prob_rmse_updated;
  Matrix prob_rmse_smoothed;

  Vector mean_state_updated;
  Vector mean_state_smoothed;
  Vector mean_prob_updated;
  Vector mean_prob_smoothed;
  Vector relative_state_updated;
  Vector relative_state_smoothed;
  Vector improvement_state;
  Vector improvement_prob;

  /// Mean wall-clock seconds per simulation, around the run calls only.
  double seconds_updating = 0.0;
  double seconds_updating_smoothing = 0.0;
};

struct MetricReport {
  int n = 0;
  int n_sims = 0;
  std::uint64_t seed_base = 0;
  Warmup warmup = Warmup::kPaper;
  bool smoothed = true;
  std::vector<AlgoMetrics> algorithms;
  /// Seeds whose simulation or any filter failed; they are excluded from
  /// every algorithm so all rows stay paired.
  std::vector<std::uint64_t> failed_seeds;
  std::vector<std::string> failure_messages;
};

/// simulate -> filter -> smooth for seeds seed_base, seed_base + 1, ...
/// Seeds run in parallel when threads > 1; results are aggregated in seed order.
MetricReport monte_carlo(const MSStateSpace& model, const CampaignConfig& config);

}  // namespace msfilter
