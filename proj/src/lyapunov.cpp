#include "msfilter/lyapunov.hpp"

#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "msfilter/error.hpp"
#include "msfilter/mixture.hpp"

namespace msfilter {

double spectral_radius(const Matrix& T) {
  if (T.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(T, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix solve_discrete_lyapunov(const Matrix& T, const Matrix& W) {
  const Eigen::Index m = T.rows();
  if (T.cols() != m || W.rows() != m || W.cols() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "Lyapunov solve needs square T and W of equal size");
  }
  const double rho = spectral_radius(T);
  if (rho >= 1.0) {
    throw Error(ErrorCode::kLyapunovDivergence,
                "state transition has spectral radius " + std::to_string(rho) + " >= 1");
  }
  // column-major vec: vec(T P T') = (T (x) T) vec(P)
  Matrix system = Matrix::Identity(m * m, m * m);
  system -= Eigen::kroneckerProduct(T, T).eval();
  const Vector rhs = W.reshaped();
  Matrix P = system.partialPivLu().solve(rhs).reshaped(m, m);
  symmetrize(P);
  return P;
}

GaussianBelief stationary_belief(const RegimeParams& params) {
  const Eigen::Index m = params.T.rows();
  GaussianBelief out;
  out.cov = solve_discrete_lyapunov(params.T, params.state_noise_cov());
  out.mean = (Matrix::Identity(m, m) - params.T).partialPivLu().solve(params.c_alpha);
  return out;
}

GaussianBelief default_initial_belief(const MSStateSpace& model, const Vector& regime_probs) {
  std::vector<GaussianBelief> per_regime;
  per_regime.reserve(model.regimes.size());
  for (const auto& regime : model.regimes) per_regime.push_back(stationary_belief(regime));

  std::vector<WeightedBelief> parts;
  for (std::size_t s = 0; s < per_regime.size(); ++s) {
    parts.push_back({regime_probs(static_cast<Eigen::Index>(s)), &per_regime[s]});
  }
  return moment_match(parts);
}

}  // namespace msfilter
