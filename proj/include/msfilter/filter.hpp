#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msfilter/kalman.hpp"
#include "msfilter/model.hpp"

namespace msfilter {

enum class Family { kGpb, kImm };

/// How the filters behave before N periods have been seen.
///   kPaper:   start directly with the full set of fixed-length histories,
///             all sharing one initial belief.
///   kGrowing: start from a single history of depth 0 and let the depth grow
///             by one per period until it reaches the filter order.
enum class Warmup { kPaper, kGrowing };

std::string_view to_string(Warmup warmup);
Warmup parse_warmup(std::string_view text);

struct AlgoTag {
  Family family = Family::kImm;
  int order = 1;

  /// "gpb2", "imm1", ...
  std::string name() const;
  /// Accepts "gpb2", "gpb:2", "GPB(2)" and the like.
  static AlgoTag parse(std::string_view text);

  bool operator==(const AlgoTag&) const = default;
};

/// Weighted set of beliefs indexed by regime histories of one depth.
struct HistoryPosterior {
  int regimes = 1;
  int depth = 0;
  std::vector<GaussianBelief> beliefs;  // h^depth entries
  std::vector<double> weights;          // h^depth entries, sum 1
  /// Marginal probabilities of the newest regime. At depth 0 there is no
  /// newest regime in the key, and this carries the regime distribution the
  /// next transition starts from.
  Vector regime_probs;

  std::size_t size() const { return weights.size(); }
};

/// Per-history quantities retained for the backward smoother.
struct HistoryRecord {
  Vector pred_mean;
  Matrix pred_cov;
  Vector upd_mean;
  Matrix upd_cov;
  Vector r_seed;           // Z' F^-1 v
  Matrix n_seed;           // Z' F^-1 Z
  Matrix gain_complement;  // I - K Z
};

struct FilterStepOutput {
  HistoryPosterior posterior;  // state carried into the next period
  int history_depth = 0;       // depth of the histories updated this period
  std::vector<double> history_weights;
  Vector fused_mean;
  Matrix fused_cov;
  Vector regime_marginals;
  double loglik_increment = 0.0;
  std::vector<HistoryRecord> records;  // empty unless retained
  std::size_t flagged_targets = 0;     // IMM targets with no reachable source
};

struct FilterOptions {
  Warmup warmup = Warmup::kPaper;
  bool retain_for_smoothing = false;
  std::optional<HistoryPosterior> init;
};

struct FilterRun {
  AlgoTag tag;
  Warmup warmup = Warmup::kPaper;
  bool retained = false;
  std::vector<FilterStepOutput> steps;
  double total_loglik = 0.0;

  int periods() const { return static_cast<int>(steps.size()); }
};

struct Fused {
  Vector mean;
  Matrix cov;
  Vector regime_marginals;
};

/// Probability-weighted moment match over all histories plus the marginal
/// distribution of the newest regime.
Fused fuse(const HistoryPosterior& posterior);

/// Regime marginals of the newest regime from weights over depth >= 1 histories.
Vector newest_regime_marginals(std::span<const double> weights, int h);

/// Sparse transition kernel from histories of `source_depth` to histories of
/// `target_depth` (either source_depth + 1, or equal when the oldest regime is
/// forgotten). Each target lists its overlap-consistent sources and the
/// probability of the transition.
class TransitionKernel {
 public:
  struct Entry {
    std::size_t source;
    double prob;
  };

  /// `start_probs` is only consulted when source_depth == 0.
  static TransitionKernel between(const MarkovChain& chain, int source_depth, int target_depth,
                                  const Vector& start_probs);
  /// Builds the kernel from a dense h^N x h^N grand transition matrix.
  static TransitionKernel from_dense(const Matrix& grand, int h, int depth);

  int regimes() const { return h_; }
  int source_depth() const { return source_depth_; }
  int target_depth() const { return target_depth_; }
  std::size_t sources() const { return sources_; }
  std::size_t targets() const { return rows_.size(); }
  const std::vector<Entry>& row(std::size_t target) const { return rows_[target]; }

 private:
  int h_ = 1;
  int source_depth_ = 0;
  int target_depth_ = 0;
  std::size_t sources_ = 1;
  std::vector<std::vector<Entry>> rows_;
};

/// Default prior over histories of `depth`: a shared initial belief and the
/// chain's stationary probability of each history.
HistoryPosterior default_posterior(const MSStateSpace& model, int depth);

/// Checks that an explicit initial posterior matches the model and the depth
/// the filter expects.
void check_posterior(const HistoryPosterior& posterior, const MSStateSpace& model, int depth);

/// Runs GPB(N) or IMM(N) as named by `tag`.
FilterRun run_filter(const MSStateSpace& model, const ObservationSeries& data, const AlgoTag& tag,
                     const FilterOptions& options = {});

namespace detail {

struct BranchUpdate {
  std::vector<GaussianBelief> updated;
  std::vector<double> weights;
  double loglik = 0.0;
  std::vector<HistoryRecord> records;
};

/// Kalman forecast + update of every target history from its prior belief,
/// then Bayes weights proportional to likelihood times `predicted`, computed
/// with a max shift in the log domain.
BranchUpdate update_branches(std::span<const GaussianBelief* const> priors,
                             std::span<const double> predicted, int h,
                             const Eigen::Ref<const Vector>& y, const MSStateSpace& model,
                             bool retain);

}  // namespace detail

}  // namespace msfilter
