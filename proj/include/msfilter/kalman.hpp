#pragma once

#include <Eigen/Dense>

#include "msfilter/model.hpp"

namespace msfilter {

struct GaussianBelief {
  Vector mean;
  Matrix cov;  // MSE matrix
};

/// Everything the update step produced besides the posterior. The last three
/// members are what the backward smoother consumes, so no factorisation has to
/// be repeated there.
struct UpdateStats {
  Vector v;             // innovation over the observed entries
  Matrix F;             // innovation covariance
  Matrix K;             // gain P Z' F^-1, m x p_observed
  double loglik = 0.0;  // log of the Gaussian density of v under F
  int observed = 0;

  Vector r_seed;           // Z' F^-1 v
  Matrix n_seed;           // Z' F^-1 Z
  Matrix gain_complement;  // I - K Z
};

struct KalmanUpdate {
  GaussianBelief posterior;
  UpdateStats stats;
};

/// In-place (P + P') / 2.
void symmetrize(Matrix& mat);

GaussianBelief kf_forecast(const GaussianBelief& prior, const RegimeParams& params);

/// Measurement update. Missing (NaN) entries of y drop the matching rows of Z,
/// c_y and g; a fully missing period returns the prediction unchanged with a
/// zero likelihood contribution.
KalmanUpdate kf_update(const GaussianBelief& pred, const Eigen::Ref<const Vector>& y,
                       const RegimeParams& params);

/// log N(v; 0, F) through a Cholesky factor of F. If the factorisation fails,
/// 1e-10 * trace(F) / p is added to the diagonal once before giving up with
/// kSingularInnovation.
double gaussian_loglik(const Vector& v, const Matrix& F);

}  // namespace msfilter
