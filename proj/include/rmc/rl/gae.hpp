#pragma once

#include <cstdint>
#include <vector>

#include "rmc/core/types.hpp"

namespace rmc::rl {

using core::Vec;

// Generalized advantage estimation over one rollout segment.
//   delta_t = r_t + gamma*V(s_{t+1}) - V(s_t)
//   A_t     = sum_k (gamma*lambda)^k delta_{t+k}, cut at episode ends
// done[t] marks that the episode ended at step t, so no value flows across
// it; `bootstrap` stands in for V(s_T) when the segment is truncated
// mid-episode. returns = advantages + values.
void compute_gae(const Vec& rewards, const Vec& values, const std::vector<uint8_t>& done,
                 double bootstrap, double gamma, double lambda, Vec& advantages, Vec& returns);

}  // namespace rmc::rl
