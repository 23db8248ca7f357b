#pragma once

#include "msfilter/kalman.hpp"
#include "msfilter/model.hpp"

namespace msfilter {

double spectral_radius(const Matrix& T);

/// Solves P = T P T' + W through the vectorised system (I - T (x) T) vec(P) = vec(W).
/// Throws kLyapunovDivergence when the spectral radius of T is >= 1.
Matrix solve_discrete_lyapunov(const Matrix& T, const Matrix& W);

/// Unconditional moments of the state under one regime held forever:
/// mean (I - T)^-1 c_alpha, covariance from the Lyapunov equation with W = R R'.
GaussianBelief stationary_belief(const RegimeParams& params);

/// Default prior shared by every initial history: the `regime_probs`-weighted
/// moment match of the per-regime stationary beliefs.
GaussianBelief default_initial_belief(const MSStateSpace& model, const Vector& regime_probs);

}  // namespace msfilter
