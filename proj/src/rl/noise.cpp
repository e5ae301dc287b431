#include "rmc/rl/noise.hpp"

#include <cmath>

namespace rmc::rl {

void ObsNoise::validate() const {
  core::require(rate > 0.0, "obs noise: rate must be positive");
  core::require(vol >= 0.0, "obs noise: volatility must be nonnegative");
}

const Vec& obs_noise_step(ObsNoise& n, double dt, Rng& g) {
  core::require(dt > 0.0, "obs noise: dt must be positive");
  const double diff = n.vol * std::sqrt(dt);
  for (double& v : n.x) v += n.rate * (n.drift - v) * dt + diff * core::normal(g, 0.0, 1.0);
  return n.x;
}

}  // namespace rmc::rl
