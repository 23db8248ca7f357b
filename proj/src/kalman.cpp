#include "msfilter/kalman.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "msfilter/error.hpp"

namespace msfilter {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

Eigen::LLT<Matrix> factorize(const Matrix& F) {
  Eigen::LLT<Matrix> llt(F);
  if (llt.info() == Eigen::Success) return llt;

  const double jitter = 1e-10 * F.trace() / static_cast<double>(F.rows());
  Matrix bumped = F;
  bumped.diagonal().array() += jitter;
  llt.compute(bumped);
  if (llt.info() != Eigen::Success || !(jitter > 0.0)) {
    throw Error(ErrorCode::kSingularInnovation, "innovation covariance is not positive definite");
  }
  return llt;
}

double log_density(const Eigen::LLT<Matrix>& llt, const Vector& v, const Vector& finv_v) {
  const Matrix& L = llt.matrixLLT();
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(v.size()) * kLog2Pi + log_det + v.dot(finv_v));
}

}  // namespace

void symmetrize(Matrix& mat) { mat = 0.5 * (mat + mat.transpose()).eval(); }

GaussianBelief kf_forecast(const GaussianBelief& prior, const RegimeParams& params) {
  GaussianBelief out;
  out.mean = params.c_alpha + params.T * prior.mean;
  out.cov = params.T * prior.cov * params.T.transpose();
  out.cov.noalias() += params.R * params.R.transpose();
  symmetrize(out.cov);
  return out;
}

double gaussian_loglik(const Vector& v, const Matrix& F) {
  if (F.rows() != v.size() || F.cols() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "gaussian_loglik: F must be square with v's length");
  }
  const auto llt = factorize(F);
  return log_density(llt, v, llt.solve(v));
}

KalmanUpdate kf_update(const GaussianBelief& pred, const Eigen::Ref<const Vector>& y,
                       const RegimeParams& params) {
  const Eigen::Index m = pred.mean.size();
  const Eigen::Index p = params.Z.rows();
  if (y.size() != p) {
    throw Error(ErrorCode::kDimensionMismatch,
                "observation has length " + std::to_string(y.size()) + ", expected " + std::to_string(p));
  }

  std::vector<Eigen::Index> seen;
  seen.reserve(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!std::isnan(y(i))) seen.push_back(i);
  }

  KalmanUpdate out;
  UpdateStats& st = out.stats;
  st.observed = static_cast<int>(seen.size());
  if (seen.empty()) {
    out.posterior = pred;
    st.v.resize(0);
    st.F.resize(0, 0);
    st.K = Matrix::Zero(m, 0);
    st.r_seed = Vector::Zero(m);
    st.n_seed = Matrix::Zero(m, m);
    st.gain_complement = Matrix::Identity(m, m);
    return out;
  }

  Matrix Z;
  Vector c_y;
  Vector y_obs;
  Matrix g;
  if (static_cast<Eigen::Index>(seen.size()) == p) {
    Z = params.Z;
    c_y = params.c_y;
    y_obs = y;
    g = params.g;
  } else {
    Z = params.Z(seen, Eigen::all);
    c_y = params.c_y(seen);
    y_obs = y(seen);
    g = params.g(seen, Eigen::all);
  }

  st.v = y_obs - Z * pred.mean - c_y;
  const Matrix PZt = pred.cov * Z.transpose();
  st.F = Z * PZt;
  st.F.noalias() += g * g.transpose();
  symmetrize(st.F);

  const auto llt = factorize(st.F);
  st.K = llt.solve(PZt.transpose()).transpose();
  const Vector finv_v = llt.solve(st.v);
  st.loglik = log_density(llt, st.v, finv_v);

  st.r_seed = Z.transpose() * finv_v;
  st.n_seed = Z.transpose() * llt.solve(Z);
  symmetrize(st.n_seed);
  st.gain_complement = Matrix::Identity(m, m);
  st.gain_complement.noalias() -= st.K * Z;

  out.posterior.mean = pred.mean + st.K * st.v;
  out.posterior.cov = st.gain_complement * pred.cov;
  symmetrize(out.posterior.cov);
  return out;
}

}  // namespace msfilter
