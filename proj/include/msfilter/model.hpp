#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace msfilter {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Dims {
  int p = 0;    // observables
  int m = 0;    // latent states
  int p_e = 0;  // measurement shocks
  int q = 0;    // state shocks

  bool operator==(const Dims&) const = default;
};

/// System matrices of one regime:
///   y_t     = c_y + Z alpha_t + g eps_t
///   alpha_t = c_alpha + T alpha_{t-1} + R eta_t
struct RegimeParams {
  Vector c_y;
  Matrix Z;
  Matrix g;
  Vector c_alpha;
  Matrix T;
  Matrix R;

  Matrix obs_noise_cov() const { return g * g.transpose(); }
  Matrix state_noise_cov() const { return R * R.transpose(); }
};

/// Row-stochastic regime transition matrix, Q(i, j) = Pr[s_t = j | s_{t-1} = i].
struct MarkovChain {
  Matrix Q;

  int regimes() const { return static_cast<int>(Q.rows()); }
};

struct MSStateSpace {
  std::vector<RegimeParams> regimes;
  MarkovChain chain;
  Dims dims;

  int h() const { return chain.regimes(); }
  const RegimeParams& regime(int s) const { return regimes[static_cast<std::size_t>(s)]; }
};

/// Observations stored row-per-period; NaN marks a missing entry.
struct ObservationSeries {
  Matrix y;

  int periods() const { return static_cast<int>(y.rows()); }
  int dim() const { return static_cast<int>(y.cols()); }
  bool missing(int t, int i) const;
};

/// Checks every structural invariant and returns the model unchanged.
/// Throws Error(kDimensionMismatch) naming the regime and matrix at fault, or
/// Error(kNonStochastic) naming the offending row of Q.
MSStateSpace validate_model(MSStateSpace model);
void validate_chain(const MarkovChain& chain);
void validate_observations(const ObservationSeries& data, const MSStateSpace& model);

/// Solves (Q' - I) pi = 0 with the normalisation row sum(pi) = 1 appended.
Vector stationary_distribution(const MarkovChain& chain);

struct Duration {
  double mean = 0.0;
  double sd = 0.0;
};

/// Geometric sojourn length of a regime: mean 1/q, sd sqrt(1-q)/q where q is
/// the exit probability.
Duration expected_duration(const MarkovChain& chain, int regime);

/// Dense h^N x h^N transition kernel between consecutive length-N histories.
/// Only overlap-consistent pairs carry mass.
Matrix grand_transition(const MarkovChain& chain, int order);

// ---------------------------------------------------------------------------
// Regime histories.
//
// A history (s_{t-d+1}, ..., s_t) of depth d is encoded base-h with the newest
// regime in the least significant digit. Dropping the oldest regime is then a
// modulo by h^{d-1}, appending a regime is key * h + s.

/// h^depth, throwing kCapExceeded past `cap`.
std::size_t history_count(int h, int depth, std::size_t cap = std::size_t{1} << 24);

std::size_t encode_history(std::span<const int> regimes, int h);
std::vector<int> decode_history(std::size_t key, int h, int depth);

inline int newest_regime(std::size_t key, int h) { return static_cast<int>(key % static_cast<std::size_t>(h)); }

/// Probability of a specific history under the chain started from `initial`
/// (distribution of its oldest regime).
double history_probability(std::span<const int> regimes, const MarkovChain& chain,
                           const Vector& initial);

}  // namespace msfilter
