#include "msfilter/model.hpp"

#include <cmath>
#include <string>

#include "msfilter/error.hpp"

namespace msfilter {

namespace {

constexpr double kRowSumTolerance = 1e-12;

void expect_shape(const Matrix& mat, Eigen::Index rows, Eigen::Index cols, std::size_t regime,
                  const char* name) {
  if (mat.rows() != rows || mat.cols() != cols) {
    throw Error(ErrorCode::kDimensionMismatch,
                "regime " + std::to_string(regime) + ": matrix " + name + " is " +
                    std::to_string(mat.rows()) + "x" + std::to_string(mat.cols()) +
                    ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (!mat.allFinite()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "regime " + std::to_string(regime) + ": matrix " + name + " has non-finite entries");
  }
}

void expect_length(const Vector& vec, Eigen::Index len, std::size_t regime, const char* name) {
  if (vec.size() != len) {
    throw Error(ErrorCode::kDimensionMismatch,
                "regime " + std::to_string(regime) + ": vector " + name + " has length " +
                    std::to_string(vec.size()) + ", expected " + std::to_string(len));
  }
  if (!vec.allFinite()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "regime " + std::to_string(regime) + ": vector " + name + " has non-finite entries");
  }
}

}  // namespace

bool ObservationSeries::missing(int t, int i) const { return std::isnan(y(t, i)); }

void validate_chain(const MarkovChain& chain) {
  const Matrix& Q = chain.Q;
  if (Q.rows() < 1 || Q.rows() != Q.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "transition matrix Q must be square and non-empty, got " +
                    std::to_string(Q.rows()) + "x" + std::to_string(Q.cols()));
  }
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    for (Eigen::Index j = 0; j < Q.cols(); ++j) {
      if (!std::isfinite(Q(i, j)) || Q(i, j) < 0.0 || Q(i, j) > 1.0) {
        throw Error(ErrorCode::kNonStochastic, "Q row " + std::to_string(i) +
                                                   " has an entry outside [0, 1] at column " +
                                                   std::to_string(j));
      }
    }
    const double row_sum = Q.row(i).sum();
    if (std::abs(row_sum - 1.0) > kRowSumTolerance) {
      throw Error(ErrorCode::kNonStochastic,
                  "Q row " + std::to_string(i) + " sums to " + std::to_string(row_sum));
    }
  }
}

MSStateSpace validate_model(MSStateSpace model) {
  validate_chain(model.chain);
  const Dims& d = model.dims;
  if (d.p < 1 || d.m < 1 || d.p_e < 0 || d.q < 0) {
    throw Error(ErrorCode::kDimensionMismatch, "dims must satisfy p >= 1, m >= 1, p_e >= 0, q >= 0");
  }
  if (static_cast<int>(model.regimes.size()) != model.h()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "model has " + std::to_string(model.regimes.size()) + " regimes but Q is " +
                    std::to_string(model.h()) + "x" + std::to_string(model.h()));
  }
  for (std::size_t s = 0; s < model.regimes.size(); ++s) {
    const RegimeParams& r = model.regimes[s];
    expect_length(r.c_y, d.p, s, "c_y");
    expect_shape(r.Z, d.p, d.m, s, "Z");
    expect_shape(r.g, d.p, d.p_e, s, "g");
    expect_length(r.c_alpha, d.m, s, "c_alpha");
    expect_shape(r.T, d.m, d.m, s, "T");
    expect_shape(r.R, d.m, d.q, s, "R");
  }
  return model;
}

void validate_observations(const ObservationSeries& data, const MSStateSpace& model) {
  if (data.dim() != model.dims.p) {
    throw Error(ErrorCode::kDimensionMismatch,
                "observations have " + std::to_string(data.dim()) + " columns, model expects p=" +
                    std::to_string(model.dims.p));
  }
  if (data.periods() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "observation series is empty");
  }
}

Vector stationary_distribution(const MarkovChain& chain) {
  validate_chain(chain);
  const Eigen::Index h = chain.Q.rows();
  Matrix system(h + 1, h);
  system.topRows(h) = chain.Q.transpose() - Matrix::Identity(h, h);
  system.row(h).setOnes();
  Vector rhs = Vector::Zero(h + 1);
  rhs(h) = 1.0;

  Eigen::ColPivHouseholderQR<Matrix> qr(system);
  qr.setThreshold(1e-10);
  if (qr.rank() < h) {
    throw Error(ErrorCode::kReducibleChain, "transition matrix has no unique stationary distribution");
  }
  Vector pi = qr.solve(rhs);
  for (Eigen::Index i = 0; i < h; ++i) {
    // round-off only; genuine negatives would have failed the rank test
    if (pi(i) < 0.0) pi(i) = 0.0;
  }
  pi /= pi.sum();
  return pi;
}

Duration expected_duration(const MarkovChain& chain, int regime) {
  validate_chain(chain);
  if (regime < 0 || regime >= chain.regimes()) {
    throw Error(ErrorCode::kInvalidArgument, "regime index " + std::to_string(regime) + " out of range");
  }
  const double exit = 1.0 - chain.Q(regime, regime);
  if (exit <= 0.0) {
    throw Error(ErrorCode::kAbsorbingRegime, "regime " + std::to_string(regime) + " is absorbing");
  }
  return {1.0 / exit, std::sqrt(1.0 - exit) / exit};
}

std::size_t history_count(int h, int depth, std::size_t cap) {
  if (h < 1 || depth < 0) {
    throw Error(ErrorCode::kInvalidArgument, "history_count needs h >= 1 and depth >= 0");
  }
  std::size_t count = 1;
  for (int i = 0; i < depth; ++i) {
    count *= static_cast<std::size_t>(h);
    if (count > cap) {
      throw Error(ErrorCode::kCapExceeded, "h^" + std::to_string(depth) + " histories exceed the cap of " +
                                               std::to_string(cap));
    }
  }
  return count;
}

std::size_t encode_history(std::span<const int> regimes, int h) {
  std::size_t key = 0;
  for (int s : regimes) {
    if (s < 0 || s >= h) {
      throw Error(ErrorCode::kInvalidArgument, "regime " + std::to_string(s) + " out of range");
    }
    key = key * static_cast<std::size_t>(h) + static_cast<std::size_t>(s);
  }
  return key;
}

std::vector<int> decode_history(std::size_t key, int h, int depth) {
  std::vector<int> regimes(static_cast<std::size_t>(depth));
  for (int i = depth - 1; i >= 0; --i) {
    regimes[static_cast<std::size_t>(i)] = static_cast<int>(key % static_cast<std::size_t>(h));
    key /= static_cast<std::size_t>(h);
  }
  return regimes;
}

double history_probability(std::span<const int> regimes, const MarkovChain& chain,
                           const Vector& initial) {
  if (regimes.empty()) return 1.0;
  double prob = initial(regimes[0]);
  for (std::size_t i = 1; i < regimes.size(); ++i) prob *= chain.Q(regimes[i - 1], regimes[i]);
  return prob;
}

Matrix grand_transition(const MarkovChain& chain, int order) {
  validate_chain(chain);
  if (order < 1) throw Error(ErrorCode::kInvalidArgument, "order must be >= 1");
  const int h = chain.regimes();
  const std::size_t size = history_count(h, order, std::size_t{1} << 14);
  const std::size_t tail = size / static_cast<std::size_t>(h);  // h^{N-1}

  Matrix grand = Matrix::Zero(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
  for (std::size_t from = 0; from < size; ++from) {
    const std::size_t overlap = from % tail;  // newest N-1 regimes of the source
    const int last = newest_regime(from, h);
    for (int s = 0; s < h; ++s) {
      const std::size_t to = overlap * static_cast<std::size_t>(h) + static_cast<std::size_t>(s);
      grand(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) = chain.Q(last, s);
    }
  }
  return grand;
}

}  // namespace msfilter
