#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "msfilter/model.hpp"

namespace msfilter {

/// Seeded generator. Each (seed, stream) pair gives an independent, fully
/// reproducible sequence.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  double normal();
  double uniform();
  /// Draws an index with the given probabilities (summing to one).
  int categorical(const Eigen::Ref<const Vector>& probs);
  Vector normal_vector(Eigen::Index size);

 private:
  std::mt19937_64 engine_;
};

struct SimOutput {
  std::vector<int> regimes;  // n entries
  Matrix states;             // n x m
  Matrix observations;       // n x p
  std::uint64_t seed = 0;

  int periods() const { return static_cast<int>(regimes.size()); }
};

/// s_1 from the stationary distribution (or `start` if given), then s_t from
/// row s_{t-1} of Q.
std::vector<int> simulate_chain(const MarkovChain& chain, int n, std::uint64_t seed,
                                std::optional<int> start = std::nullopt);

/// Draws states and observations along a given regime path. alpha_0 comes
/// from the regime-0 stationary belief unless supplied.
SimOutput simulate_ssm(const MSStateSpace& model, const std::vector<int>& regimes, std::uint64_t seed,
                       const std::optional<Vector>& alpha0 = std::nullopt);

/// Chain then states, from one seed.
SimOutput simulate(const MSStateSpace& model, int n, std::uint64_t seed);

}  // namespace msfilter
