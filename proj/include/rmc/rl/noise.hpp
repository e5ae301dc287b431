#pragma once

#include <algorithm>

#include "rmc/core/rng.hpp"
#include "rmc/core/types.hpp"

namespace rmc::rl {

using core::Rng;
using core::Vec;

// Mean-reverting perturbation added to model outputs during training, one
// channel per observation. Stationary std is volatility/sqrt(2*rate).
struct ObsNoise {
  double rate = 0.15;
  double vol = 0.2;
  double drift = 0.0;
  Vec x;

  explicit ObsNoise(int channels = 0) : x(channels, 0.0) {}
  void validate() const;
  void reset() { std::fill(x.begin(), x.end(), drift); }
};

// x <- x + rate*(drift - x)*dt + vol*sqrt(dt)*xi. Returns the updated state.
const Vec& obs_noise_step(ObsNoise& n, double dt, Rng& g);

}  // namespace rmc::rl
