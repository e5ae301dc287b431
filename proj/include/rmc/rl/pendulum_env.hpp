#pragma once

#include "rmc/rl/runner.hpp"
#include "rmc/sim/pendulum.hpp"

namespace rmc::rl {

struct PendulumEnvConfig {
  sim::PendulumConfig dyn;
  int episode_steps = 200;
  double torque_lo = -2.0;
  double torque_hi = 2.0;
};

// Single-head swing-up task on the physical pendulum. Observation is
// (sin theta, cos theta, omega); the internal angle is kept wrapped to
// (-pi, pi] so the quadratic angle penalty matches what the policy can see.
class PendulumEnv : public Env {
 public:
  explicit PendulumEnv(const PendulumEnvConfig& cfg = {});

  int obs_dim() const override { return 3; }
  int head_count() const override { return 1; }
  void set_training(bool on) override { (void)on; }
  Vec reset(core::Rng& g) override;
  StepResult step(const std::vector<HeadAction>& actions, core::Rng& g, Vec& next_obs) override;

 private:
  PendulumEnvConfig cfg_;
  sim::PendulumState s_;
  int t_ = 0;
};

// A bundle with one Gaussian head sized for PendulumEnv.
PolicyBundle make_pendulum_policy(const PendulumEnvConfig& cfg, const std::vector<int>& hidden,
                                  core::Rng& g);

}  // namespace rmc::rl
