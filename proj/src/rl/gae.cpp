#include "rmc/rl/gae.hpp"

namespace rmc::rl {

void compute_gae(const Vec& rewards, const Vec& values, const std::vector<uint8_t>& done,
                 double bootstrap, double gamma, double lambda, Vec& advantages, Vec& returns) {
  const size_t n = rewards.size();
  core::require(values.size() == n && done.size() == n, "gae: misaligned rollout");
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
  double acc = 0.0;
  for (size_t t = n; t-- > 0;) {
    const double next_v = done[t] ? 0.0 : (t + 1 < n ? values[t + 1] : bootstrap);
    const double delta = rewards[t] + gamma * next_v - values[t];
    acc = delta + gamma * lambda * (done[t] ? 0.0 : acc);
    advantages[t] = acc;
    returns[t] = acc + values[t];
  }
}

}  // namespace rmc::rl
