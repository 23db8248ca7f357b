#include "msfilter/simulate.hpp"

#include <algorithm>
#include <string>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "msfilter/error.hpp"
#include "msfilter/lyapunov.hpp"

namespace msfilter {

namespace {

constexpr std::uint64_t kChainStream = 1;
constexpr std::uint64_t kStateStream = 2;

/// Symmetric square root of a PSD matrix, negative eigenvalues clipped.
Matrix psd_sqrt(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double Rng::normal() {
  boost::random::normal_distribution<double> dist;
  return dist(engine_);
}

double Rng::uniform() {
  boost::random::uniform_01<double> dist;
  return dist(engine_);
}

Vector Rng::normal_vector(Eigen::Index size) {
  Vector out(size);
  for (Eigen::Index i = 0; i < size; ++i) out(i) = normal();
  return out;
}

int Rng::categorical(const Eigen::Ref<const Vector>& probs) {
  const double u = uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u < acc) return static_cast<int>(i);
  }
  // u landed in the round-off gap above the cumulative sum
  for (Eigen::Index i = probs.size() - 1; i >= 0; --i) {
    if (probs(i) > 0.0) return static_cast<int>(i);
  }
  return 0;
}

std::vector<int> simulate_chain(const MarkovChain& chain, int n, std::uint64_t seed, std::optional<int> start) {
  validate_chain(chain);
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "simulation length must be >= 1");
  const int h = chain.regimes();
  Rng rng(seed, kChainStream);
  std::vector<int> path(static_cast<std::size_t>(n));
  if (start) {
    if (*start < 0 || *start >= h) {
      throw Error(ErrorCode::kInvalidArgument, "start regime " + std::to_string(*start) + " out of range");
    }
    path[0] = *start;
  } else {
    path[0] = rng.categorical(stationary_distribution(chain));
  }
  for (std::size_t t = 1; t < path.size(); ++t) {
    path[t] = rng.categorical(chain.Q.row(path[t - 1]).transpose());
  }
  return path;
}

SimOutput simulate_ssm(const MSStateSpace& model, const std::vector<int>& regimes, std::uint64_t seed,
                       const std::optional<Vector>& alpha0) {
  const int h = model.h();
  for (int s : regimes) {
    if (s < 0 || s >= h) throw Error(ErrorCode::kInvalidArgument, "regime " + std::to_string(s) + " out of range");
  }
  const Dims& d = model.dims;
  Rng rng(seed, kStateStream);

  Vector alpha;
  if (alpha0) {
    if (alpha0->size() != d.m) throw Error(ErrorCode::kDimensionMismatch, "alpha0 must have length m");
    alpha = *alpha0;
  } else {
    const GaussianBelief start = stationary_belief(model.regime(0));
    alpha = start.mean + psd_sqrt(start.cov) * rng.normal_vector(d.m);
  }

  SimOutput out;
  out.seed = seed;
  out.regimes = regimes;
  const auto n = static_cast<Eigen::Index>(regimes.size());
  out.states.resize(n, d.m);
  out.observations.resize(n, d.p);
  for (Eigen::Index t = 0; t < n; ++t) {
    const RegimeParams& r = model.regime(regimes[static_cast<std::size_t>(t)]);
    const Vector eta = rng.normal_vector(d.q);
    const Vector eps = rng.normal_vector(d.p_e);
    alpha = r.c_alpha + r.T * alpha + r.R * eta;
    out.states.row(t) = alpha.transpose();
    out.observations.row(t) = (r.c_y + r.Z * alpha + r.g * eps).transpose();
  }
  return out;
}

SimOutput simulate(const MSStateSpace& model, int n, std::uint64_t seed) {
  return simulate_ssm(model, simulate_chain(model.chain, n, seed), seed);
}

}  // namespace msfilter
