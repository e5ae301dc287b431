#include "rmc/rl/pendulum_env.hpp"

#include <algorithm>
#include <cmath>

#include "rmc/rl/reward.hpp"

namespace rmc::rl {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) { return std::remainder(a, 2.0 * kPi); }

}  // namespace

PendulumEnv::PendulumEnv(const PendulumEnvConfig& cfg) : cfg_(cfg) {
  core::require(cfg_.episode_steps >= 1, "pendulum env: episode must have steps");
  core::require(cfg_.torque_lo < cfg_.torque_hi, "pendulum env: bad torque bounds");
}

Vec PendulumEnv::reset(core::Rng& g) {
  s_.theta = core::uniform(g, -kPi, kPi);
  s_.omega = core::uniform(g, -1.0, 1.0);
  t_ = 0;
  double x, y;
  sim::observe_pendulum(s_, x, y);
  return {x, y, s_.omega};
}

StepResult PendulumEnv::step(const std::vector<HeadAction>& actions, core::Rng&, Vec& next_obs) {
  core::require(actions.size() == 1 && actions[0].cont.size() == 1,
                "pendulum env: expected one scalar action");
  const double torque =
      std::clamp(actions[0].cont[0], cfg_.torque_lo, cfg_.torque_hi);
  s_ = sim::pendulum_step(cfg_.dyn, s_, torque);
  s_.theta = wrap_angle(s_.theta);
  ++t_;
  double x, y;
  sim::observe_pendulum(s_, x, y);
  next_obs = {x, y, s_.omega};
  StepResult res;
  res.reward = {reward_pendulum(s_, torque)};
  res.done = t_ >= cfg_.episode_steps;
  return res;
}

PolicyBundle make_pendulum_policy(const PendulumEnvConfig& cfg, const std::vector<int>& hidden,
                                  core::Rng& g) {
  PolicyHead head;
  head.kind = PolicyHead::Kind::gaussian;
  head.obs_idx = {0, 1, 2};
  head.gauss.lo = {cfg.torque_lo};
  head.gauss.hi = {cfg.torque_hi};
  std::vector<int> actor_sizes{3};
  actor_sizes.insert(actor_sizes.end(), hidden.begin(), hidden.end());
  actor_sizes.push_back(2);
  head.gauss.net = core::Mlp::zeros(actor_sizes);
  head.gauss.net.init(g);
  std::vector<int> critic_sizes{3};
  critic_sizes.insert(critic_sizes.end(), hidden.begin(), hidden.end());
  critic_sizes.push_back(1);
  head.critic.net = core::Mlp::zeros(critic_sizes);
  head.critic.net.init(g);
  PolicyBundle b;
  b.heads.push_back(std::move(head));
  return b;
}

}  // namespace rmc::rl
