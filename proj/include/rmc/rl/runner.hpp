#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rmc/core/optim.hpp"
#include "rmc/core/rng.hpp"
#include "rmc/rl/policy.hpp"
#include "rmc/rl/ppo.hpp"

namespace rmc::rl {

// Joint action of one agent step, one entry per head.
struct HeadAction {
  Vec cont;       // continuous heads
  int choice = 0; // discrete heads
};

struct StepResult {
  Vec reward;  // one entry per head
  bool done = false;
};

// Episodic environment with per-head rewards. step() fills the next
// observation; after done the caller must reset. set_training toggles
// exploration-time perturbations (observation noise).
class Env {
 public:
  virtual ~Env() = default;
  virtual int obs_dim() const = 0;
  virtual int head_count() const = 0;
  virtual void set_training(bool on) = 0;
  virtual Vec reset(core::Rng& g) = 0;
  virtual StepResult step(const std::vector<HeadAction>& actions, core::Rng& g,
                          Vec& next_obs) = 0;
};

using EnvFactory = std::function<std::unique_ptr<Env>(int worker)>;

struct CurveRow {
  int iteration = 0;
  double episode_reward = 0.0;
  double surrogate = 0.0;
  double value_loss = 0.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
};

void save_curve(const std::vector<CurveRow>& rows, const std::string& path);

// Synchronous distributed PPO: W workers each hold an environment, an rng,
// exploration state, and a copy of the policy. Every iteration each worker
// rolls out `horizon` steps; segments are gathered in worker order, GAE runs
// per segment, the central learner updates, and the new weights are copied
// back to every worker. Results do not depend on scheduling.
class Trainer {
 public:
  Trainer(PolicyBundle init, const EnvFactory& make_env, const PpoConfig& cfg);

  void iterate();
  PolicyBundle run();  // cfg.iterations calls to iterate(); returns the central policy

  int iteration() const { return iter_; }
  const PolicyBundle& central() const { return central_; }
  const PolicyBundle& worker_policy(int w) const;
  const std::vector<CurveRow>& curve() const { return curve_; }

 private:
  struct HeadBuffer {
    core::Mat obs, z;
    std::vector<int> choice;
    Vec log_prob, reward, value;
  };
  struct WorkerSlot {
    std::unique_ptr<Env> env;
    PolicyBundle policy;
    core::Rng rng;
    Vec obs;
    bool fresh = true;
    double ep_accum = 0.0;
    std::vector<HeadBuffer> buf;
    std::vector<uint8_t> done;
    Vec bootstrap;
    Vec completed;
    std::string error;
  };

  void rollout_worker(WorkerSlot& w);

  PpoConfig cfg_;
  PolicyBundle central_;
  std::vector<WorkerSlot> workers_;
  std::vector<core::AdamState> actor_opt_, critic_opt_;
  core::Rng update_rng_;
  std::vector<CurveRow> curve_;
  int iter_ = 0;
  double last_ep_reward_;
};

PolicyBundle distributed_train(const PolicyBundle& init, const EnvFactory& make_env,
                               const PpoConfig& cfg, std::vector<CurveRow>* curve = nullptr);

// Mean episodic return of the deterministic policy (mean over heads per
// step, summed over each episode, averaged over episodes).
double evaluate_deterministic(const PolicyBundle& bundle, Env& env, int episodes, core::Rng& g);

}  // namespace rmc::rl
