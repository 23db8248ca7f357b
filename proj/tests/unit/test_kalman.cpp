#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "msfilter/error.hpp"
#include "msfilter/kalman.hpp"
#include "msfilter/lyapunov.hpp"
#include "msfilter/mixture.hpp"
#include "oracles.hpp"

using namespace msfilter;

namespace {

RegimeParams scalar(double T, double R, double Z, double g) {
  RegimeParams r;
  r.c_y = Vector::Zero(1);
  r.Z = Matrix::Constant(1, 1, Z);
  r.g = Matrix::Constant(1, 1, g);
  r.c_alpha = Vector::Zero(1);
  r.T = Matrix::Constant(1, 1, T);
  r.R = Matrix::Constant(1, 1, R);
  return r;
}

GaussianBelief belief(Vector mean, Matrix cov) { return {std::move(mean), std::move(cov)}; }

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

TEST(KfForecast, IdentityDynamics) {
  std::mt19937_64 rng(1);
  RegimeParams r;
  r.T = Matrix::Identity(3, 3);
  r.R = Matrix::Zero(3, 2);
  r.c_alpha = Vector::Zero(3);
  const Matrix A = oracle::random_matrix(rng, 3, 3);
  const GaussianBelief prior = belief(oracle::random_matrix(rng, 3, 1).col(0), A * A.transpose());
  const GaussianBelief out = kf_forecast(prior, r);
  EXPECT_LT(oracle::max_abs(out.mean, prior.mean), 1e-15);
  EXPECT_LT(oracle::max_abs(out.cov, prior.cov), 1e-15);
}

TEST(KfForecast, ScalarExample) {
  const GaussianBelief out = kf_forecast(belief(Vector::Zero(1), Matrix::Ones(1, 1)), scalar(0.9, 1.0, 1.0, 1.0));
  EXPECT_NEAR(out.mean(0), 0.0, 1e-15);
  EXPECT_NEAR(out.cov(0, 0), 1.81, 1e-14);
}

TEST(KfForecast, MemorylessDynamics) {
  RegimeParams r;
  r.c_alpha = Vector(2);
  r.c_alpha << 1.0, 0.0;
  r.T = Matrix::Zero(2, 2);
  r.R = Matrix(2, 1);
  r.R << 1.0, 2.0;
  const GaussianBelief out = kf_forecast(belief(Vector::Ones(2), Matrix::Identity(2, 2)), r);
  EXPECT_EQ(out.mean, r.c_alpha);
  EXPECT_LT(oracle::max_abs(out.cov, r.R * r.R.transpose()), 1e-15);
}

TEST(KfUpdate, UninformativeObservation) {
  RegimeParams r;
  r.Z = Matrix::Zero(2, 3);
  r.g = Matrix::Identity(2, 2);
  r.c_y = Vector(2);
  r.c_y << 0.5, -1.0;
  const GaussianBelief pred = belief(Vector::Ones(3), 2.0 * Matrix::Identity(3, 3));
  Vector y(2);
  y << 3.0, 4.0;
  const KalmanUpdate upd = kf_update(pred, y, r);
  EXPECT_LT(oracle::max_abs(upd.posterior.mean, pred.mean), 1e-15);
  EXPECT_LT(oracle::max_abs(upd.posterior.cov, pred.cov), 1e-15);
  EXPECT_LT(oracle::max_abs(upd.stats.v, y - r.c_y), 1e-15);
  EXPECT_LT(oracle::max_abs(upd.stats.F, Matrix::Identity(2, 2)), 1e-15);
}

TEST(KfUpdate, ScalarExample) {
  const GaussianBelief pred = belief(Vector::Zero(1), Matrix::Constant(1, 1, 1.81));
  const KalmanUpdate upd = kf_update(pred, Vector::Ones(1), scalar(0.9, 1.0, 1.0, 1.0));
  EXPECT_NEAR(upd.stats.v(0), 1.0, 1e-15);
  EXPECT_NEAR(upd.stats.F(0, 0), 2.81, 1e-15);
  EXPECT_NEAR(upd.stats.K(0, 0), 1.81 / 2.81, 1e-15);
  EXPECT_NEAR(upd.stats.K(0, 0), 0.64413, 5e-6);
  EXPECT_NEAR(upd.posterior.mean(0), 0.64413, 5e-6);
  EXPECT_NEAR(upd.posterior.cov(0, 0), 1.81 - 1.81 * 1.81 / 2.81, 1e-14);
  EXPECT_NEAR(upd.posterior.cov(0, 0), 0.64413, 5e-6);
  EXPECT_NEAR(upd.stats.loglik, -kHalfLog2Pi - 0.5 * std::log(2.81) - 0.5 / 2.81, 1e-14);
}

TEST(KfUpdate, FullyMissingPeriodPassesThrough) {
  const GaussianBelief pred = belief(Vector::Ones(1), Matrix::Constant(1, 1, 1.81));
  const Vector y = Vector::Constant(1, std::numeric_limits<double>::quiet_NaN());
  const KalmanUpdate upd = kf_update(pred, y, scalar(0.9, 1.0, 1.0, 1.0));
  EXPECT_EQ(upd.posterior.mean, pred.mean);
  EXPECT_EQ(upd.posterior.cov, pred.cov);
  EXPECT_EQ(upd.stats.loglik, 0.0);
  EXPECT_EQ(upd.stats.observed, 0);
}

TEST(KfUpdate, PartiallyMissingDropsRows) {
  std::mt19937_64 rng(3);
  RegimeParams r;
  r.Z = oracle::random_matrix(rng, 3, 2);
  r.g = oracle::random_matrix(rng, 3, 3);
  r.c_y = oracle::random_matrix(rng, 3, 1).col(0);
  const GaussianBelief pred = belief(Vector::Ones(2), Matrix::Identity(2, 2));
  Vector y = oracle::random_matrix(rng, 3, 1).col(0);
  y(1) = std::numeric_limits<double>::quiet_NaN();

  RegimeParams reduced;
  const std::vector<Eigen::Index> keep{0, 2};
  reduced.Z = r.Z(keep, Eigen::all);
  reduced.g = r.g(keep, Eigen::all);
  reduced.c_y = r.c_y(keep);
  const KalmanUpdate a = kf_update(pred, y, r);
  const KalmanUpdate b = kf_update(pred, Vector(y(keep)), reduced);
  EXPECT_EQ(a.stats.observed, 2);
  EXPECT_LT(oracle::max_abs(a.posterior.mean, b.posterior.mean), 1e-14);
  EXPECT_LT(oracle::max_abs(a.posterior.cov, b.posterior.cov), 1e-14);
  EXPECT_NEAR(a.stats.loglik, b.stats.loglik, 1e-13);
}

TEST(KfUpdate, PosteriorNeverExceedsPrior) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    RegimeParams r;
    r.Z = oracle::random_matrix(rng, 2, 3);
    r.g = oracle::random_matrix(rng, 2, 2);
    r.c_y = Vector::Zero(2);
    const Matrix A = oracle::random_matrix(rng, 3, 3);
    const GaussianBelief pred = belief(Vector::Zero(3), A * A.transpose() + 0.1 * Matrix::Identity(3, 3));
    const KalmanUpdate upd = kf_update(pred, oracle::random_matrix(rng, 2, 1).col(0), r);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(pred.cov - upd.posterior.cov);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
    EXPECT_LT(oracle::max_abs(upd.posterior.cov, upd.posterior.cov.transpose()), 1e-10);
  }
}

TEST(KfUpdate, SingularInnovationFails) {
  const GaussianBelief pred = belief(Vector::Zero(1), Matrix::Zero(1, 1));
  try {
    kf_update(pred, Vector::Ones(1), scalar(0.5, 1.0, 1.0, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularInnovation);
  }
}

TEST(GaussianLoglik, Examples) {
  EXPECT_NEAR(gaussian_loglik(Vector::Zero(1), Matrix::Ones(1, 1)), -kHalfLog2Pi, 1e-15);
  EXPECT_NEAR(gaussian_loglik(Vector::Zero(1), Matrix::Ones(1, 1)), -0.91894, 5e-6);
  EXPECT_NEAR(gaussian_loglik(Vector::Ones(1), Matrix::Constant(1, 1, 2.81)),
              -kHalfLog2Pi - 0.5 * std::log(2.81) - 0.5 / 2.81, 1e-14);
  EXPECT_NEAR(gaussian_loglik(Vector::Zero(2), Matrix::Identity(2, 2)), -2.0 * kHalfLog2Pi, 1e-15);
}

TEST(GaussianLoglik, MatchesExplicitInverseAndDeterminant) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix A = oracle::random_matrix(rng, 3, 3);
    const Matrix F = A * A.transpose() + 0.5 * Matrix::Identity(3, 3);
    const Vector v = oracle::random_matrix(rng, 3, 1).col(0);
    EXPECT_NEAR(gaussian_loglik(v, F), oracle::gaussian_logpdf(v, F), 1e-10);
  }
}

TEST(Lyapunov, MatchesFixedPointIteration) {
  std::mt19937_64 rng(9);
  for (int m = 1; m <= 4; ++m) {
    const Matrix T = oracle::random_stable(rng, m, 0.85);
    const Matrix R = oracle::random_matrix(rng, m, m);
    const Matrix W = R * R.transpose();
    EXPECT_LT(oracle::max_abs(solve_discrete_lyapunov(T, W), oracle::lyapunov_fixed_point(T, W)), 1e-10);
  }
}

TEST(Lyapunov, DivergentTransitionFails) {
  try {
    solve_discrete_lyapunov(Matrix::Constant(1, 1, 1.0), Matrix::Ones(1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLyapunovDivergence);
  }
}

TEST(Lyapunov, DefaultBeliefIsMixtureOfStationaryMoments) {
  std::mt19937_64 rng(10);
  const MSStateSpace model = oracle::random_model(rng, 3, 2, 2);
  const Vector pi = oracle::power_stationary(model.chain.Q);
  const GaussianBelief b = default_initial_belief(model, pi);
  const auto [mean, cov] = oracle::mixture_prior(model, pi);
  EXPECT_LT(oracle::max_abs(b.mean, mean), 1e-10);
  EXPECT_LT(oracle::max_abs(b.cov, cov), 1e-10);
}

TEST(MomentMatch, TwoComponentExample) {
  const GaussianBelief a = belief(Vector::Ones(1), Matrix::Ones(1, 1));
  const GaussianBelief b = belief(-Vector::Ones(1), Matrix::Ones(1, 1));
  const std::vector<WeightedBelief> parts{{0.5, &a}, {0.5, &b}};
  const GaussianBelief out = moment_match(parts);
  EXPECT_NEAR(out.mean(0), 0.0, 1e-15);
  EXPECT_NEAR(out.cov(0, 0), 2.0, 1e-15);
}

TEST(MomentMatch, SingleComponentIsIdentity) {
  const GaussianBelief a = belief(Vector::Constant(2, 3.0), 4.0 * Matrix::Identity(2, 2));
  const std::vector<WeightedBelief> parts{{1.0, &a}};
  const GaussianBelief out = moment_match(parts);
  EXPECT_EQ(out.mean, a.mean);
  EXPECT_EQ(out.cov, a.cov);
}

TEST(MomentMatch, PreservesMixtureMomentsOnRandomCases) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + trial % 6;
    const int m = 1 + trial % 4;
    std::vector<GaussianBelief> comps;
    std::vector<double> w;
    for (int i = 0; i < k; ++i) {
      const Matrix A = oracle::random_matrix(rng, m, m);
      comps.push_back(belief(oracle::random_matrix(rng, m, 1, 2.0).col(0), A * A.transpose()));
      w.push_back(u(rng));
    }
    double total = 0.0;
    for (double x : w) total += x;
    std::vector<WeightedBelief> parts;
    for (int i = 0; i < k; ++i) parts.push_back({w[static_cast<std::size_t>(i)], &comps[static_cast<std::size_t>(i)]});
    const GaussianBelief out = moment_match(parts);
    // E[x] and E[x x'] of the mixture against those of the merged Gaussian
    Vector m1 = Vector::Zero(m);
    Matrix m2 = Matrix::Zero(m, m);
    for (int i = 0; i < k; ++i) {
      const auto& c = comps[static_cast<std::size_t>(i)];
      const double p = w[static_cast<std::size_t>(i)] / total;
      m1 += p * c.mean;
      m2 += p * (c.cov + c.mean * c.mean.transpose());
    }
    EXPECT_LT(oracle::max_abs(out.mean, m1), 1e-10);
    EXPECT_LT(oracle::max_abs(out.cov + out.mean * out.mean.transpose(), m2), 1e-10);
  }
}
