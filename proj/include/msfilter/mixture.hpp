#pragma once

#include <span>
#include <vector>

#include "msfilter/kalman.hpp"

namespace msfilter {

struct WeightedBelief {
  double weight = 0.0;
  const GaussianBelief* belief = nullptr;
};

/// Collapses a Gaussian mixture into one Gaussian with the same first two
/// moments (law of total variance). Weights are normalised internally; if they
/// sum to zero the components are averaged uniformly.
GaussianBelief moment_match(std::span<const WeightedBelief> parts);

}  // namespace msfilter
