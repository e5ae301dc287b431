#pragma once

#include <cstdint>
#include <vector>

#include "rmc/core/optim.hpp"
#include "rmc/core/types.hpp"
#include "rmc/rl/policy.hpp"

namespace rmc::rl {

struct PpoConfig {
  double clip = 0.1;
  double gamma = 0.99;
  double lam = 0.95;
  double c1 = 0.5;  // value-loss weight
  double c2 = 0.0;  // entropy-bonus weight
  double lr = 3e-4;
  int horizon = 1440;    // rollout steps per worker per iteration
  int minibatch = 720;   // transitions per update repetition
  int updates = 80;      // repetitions per iteration
  int workers = 4;
  int iterations = 150;
  uint64_t seed = 0;

  void validate() const;
};

// Transitions for one head, gathered across workers in worker order.
struct HeadRollout {
  core::Mat obs;            // one row per transition
  core::Mat z;              // pre-squash draws (continuous heads only)
  std::vector<int> choice;  // picked indices (discrete heads only)
  Vec log_prob, advantage, ret;

  int size() const { return obs.rows; }
  void validate(const PolicyHead& head) const;
};

// Per-repetition statistics of one central update.
struct PpoStats {
  Vec ratio_mean, clip_fraction, surrogate, value_loss, entropy;
};

double mean_of(const Vec& v);

// `updates` repetitions of: draw `minibatch` distinct transitions, normalize
// their advantages (skipped when the minibatch has zero spread), take one
// Adam step on the clipped surrogate plus entropy bonus (actor) and on the
// weighted value MSE (critic).
PpoStats ppo_update(PolicyHead& head, const HeadRollout& data, const PpoConfig& cfg,
                    core::AdamState& actor_opt, core::AdamState& critic_opt, core::Rng& g);

}  // namespace rmc::rl
