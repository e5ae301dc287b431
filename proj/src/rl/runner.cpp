#include "rmc/rl/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "rmc/rl/gae.hpp"

namespace rmc::rl {

using core::require;

void save_curve(const std::vector<CurveRow>& rows, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write learning curve: " + path);
  f << "iteration,episode_reward,surrogate,value_loss,clip_fraction,entropy\n";
  char line[256];
  for (const CurveRow& r : rows) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iteration,
                  r.episode_reward, r.surrogate, r.value_loss, r.clip_fraction, r.entropy);
    f << line;
  }
}

Trainer::Trainer(PolicyBundle init, const EnvFactory& make_env, const PpoConfig& cfg)
    : cfg_(cfg),
      central_(std::move(init)),
      update_rng_(core::derive_seed(cfg.seed, "central-update")),
      last_ep_reward_(std::numeric_limits<double>::quiet_NaN()) {
  cfg_.validate();
  central_.validate();
  workers_.resize(cfg_.workers);
  for (int w = 0; w < cfg_.workers; ++w) {
    WorkerSlot& slot = workers_[w];
    slot.env = make_env(w);
    require(slot.env != nullptr, "trainer: environment factory returned null");
    require(slot.env->head_count() == static_cast<int>(central_.heads.size()),
            "trainer: environment and policy disagree on head count");
    for (const PolicyHead& h : central_.heads)
      for (int idx : h.obs_idx)
        require(idx < slot.env->obs_dim(), "trainer: head reads past environment observation");
    slot.policy = central_;
    slot.env->set_training(true);
    char label[32];
    std::snprintf(label, sizeof label, "worker-%d", w);
    slot.rng = core::Rng(core::derive_seed(cfg_.seed, label));
  }
  for (const PolicyHead& h : central_.heads) {
    actor_opt_.emplace_back(h.actor_net().param_count());
    critic_opt_.emplace_back(h.critic.net.param_count());
  }
}

const PolicyBundle& Trainer::worker_policy(int w) const {
  require(w >= 0 && w < static_cast<int>(workers_.size()), "trainer: no such worker");
  return workers_[w].policy;
}

void Trainer::rollout_worker(WorkerSlot& w) {
  const int n_heads = static_cast<int>(w.policy.heads.size());
  const int t_steps = cfg_.horizon;
  w.buf.assign(n_heads, {});
  for (int h = 0; h < n_heads; ++h) {
    PolicyHead& head = w.policy.heads[h];
    HeadBuffer& b = w.buf[h];
    b.obs = core::Mat(t_steps, head.obs_dim());
    if (head.kind == PolicyHead::Kind::gaussian) b.z = core::Mat(t_steps, head.gauss.dims());
    b.choice.assign(head.kind == PolicyHead::Kind::discrete ? t_steps : 0, 0);
    b.log_prob.assign(t_steps, 0.0);
    b.reward.assign(t_steps, 0.0);
    b.value.assign(t_steps, 0.0);
  }
  w.done.assign(t_steps, 0);
  w.bootstrap.assign(n_heads, 0.0);
  w.completed.clear();

  Vec hobs, next_obs;
  std::vector<HeadAction> actions(n_heads);
  for (int t = 0; t < t_steps; ++t) {
    if (w.fresh) {
      w.obs = w.env->reset(w.rng);
      require(static_cast<int>(w.obs.size()) == w.env->obs_dim(),
              "trainer: reset returned wrong observation width");
      w.fresh = false;
      w.ep_accum = 0.0;
    }
    for (int h = 0; h < n_heads; ++h) {
      PolicyHead& head = w.policy.heads[h];
      HeadBuffer& b = w.buf[h];
      head.gather_obs(w.obs, hobs);
      std::copy(hobs.begin(), hobs.end(), b.obs.row(t).begin());
      b.value[t] = value_of(head.critic, hobs);
      if (head.kind == PolicyHead::Kind::gaussian) {
        ContinuousSample s = sample_continuous(head.gauss, hobs, w.rng);
        actions[h].cont = s.action;
        std::copy(s.z.begin(), s.z.end(), b.z.row(t).begin());
        b.log_prob[t] = s.log_prob;
      } else {
        DiscreteSample s = sample_discrete(head.disc, hobs, w.rng);
        actions[h].choice = s.action;
        b.choice[t] = s.action;
        b.log_prob[t] = s.log_prob;
      }
    }
    StepResult res = w.env->step(actions, w.rng, next_obs);
    require(res.reward.size() == static_cast<size_t>(n_heads),
            "trainer: environment returned wrong reward width");
    double step_mean = 0.0;
    for (int h = 0; h < n_heads; ++h) {
      w.buf[h].reward[t] = res.reward[h];
      step_mean += res.reward[h];
    }
    w.ep_accum += step_mean / n_heads;
    w.done[t] = res.done ? 1 : 0;
    if (res.done) {
      w.completed.push_back(w.ep_accum);
      w.fresh = true;
    } else {
      w.obs = next_obs;
    }
  }
  if (!w.done[t_steps - 1]) {
    for (int h = 0; h < n_heads; ++h) {
      w.policy.heads[h].gather_obs(w.obs, hobs);
      w.bootstrap[h] = value_of(w.policy.heads[h].critic, hobs);
    }
  }
}

void Trainer::iterate() {
  const int n_heads = static_cast<int>(central_.heads.size());
  const int n_workers = static_cast<int>(workers_.size());

#pragma omp parallel for schedule(static)
  for (int w = 0; w < n_workers; ++w) {
    try {
      rollout_worker(workers_[w]);
    } catch (const std::exception& e) {
      workers_[w].error = e.what();
    }
  }
  for (int w = 0; w < n_workers; ++w) {
    if (!workers_[w].error.empty()) {
      const std::string what = workers_[w].error;
      workers_[w].error.clear();
      throw std::runtime_error("worker " + std::to_string(w) + ": " + what);
    }
  }

  // Per-segment advantage estimation, then gathering in worker order.
  const int t_steps = cfg_.horizon;
  CurveRow row;
  row.iteration = iter_;
  Vec adv, ret;
  for (int h = 0; h < n_heads; ++h) {
    PolicyHead& head = central_.heads[h];
    HeadRollout pool;
    pool.obs = core::Mat(n_workers * t_steps, head.obs_dim());
    if (head.kind == PolicyHead::Kind::gaussian)
      pool.z = core::Mat(n_workers * t_steps, head.gauss.dims());
    else
      pool.choice.assign(static_cast<size_t>(n_workers) * t_steps, 0);
    pool.log_prob.assign(static_cast<size_t>(n_workers) * t_steps, 0.0);
    pool.advantage.assign(static_cast<size_t>(n_workers) * t_steps, 0.0);
    pool.ret.assign(static_cast<size_t>(n_workers) * t_steps, 0.0);

    for (int w = 0; w < n_workers; ++w) {
      const WorkerSlot& slot = workers_[w];
      const HeadBuffer& b = slot.buf[h];
      compute_gae(b.reward, b.value, slot.done, slot.bootstrap[h], cfg_.gamma, cfg_.lam, adv,
                  ret);
      const size_t base = static_cast<size_t>(w) * t_steps;
      std::copy(b.obs.a.begin(), b.obs.a.end(),
                pool.obs.a.begin() + base * head.obs_dim());
      if (head.kind == PolicyHead::Kind::gaussian)
        std::copy(b.z.a.begin(), b.z.a.end(), pool.z.a.begin() + base * head.gauss.dims());
      else
        std::copy(b.choice.begin(), b.choice.end(), pool.choice.begin() + base);
      std::copy(b.log_prob.begin(), b.log_prob.end(), pool.log_prob.begin() + base);
      std::copy(adv.begin(), adv.end(), pool.advantage.begin() + base);
      std::copy(ret.begin(), ret.end(), pool.ret.begin() + base);
    }

    PpoStats st = ppo_update(head, pool, cfg_, actor_opt_[h], critic_opt_[h], update_rng_);
    row.surrogate += mean_of(st.surrogate) / n_heads;
    row.value_loss += mean_of(st.value_loss) / n_heads;
    row.clip_fraction += mean_of(st.clip_fraction) / n_heads;
    row.entropy += mean_of(st.entropy) / n_heads;
  }

  double ep_sum = 0.0;
  int ep_n = 0;
  for (const WorkerSlot& w : workers_) {
    for (double r : w.completed) {
      ep_sum += r;
      ++ep_n;
    }
  }
  if (ep_n > 0) last_ep_reward_ = ep_sum / ep_n;
  row.episode_reward = last_ep_reward_;
  curve_.push_back(row);

  for (WorkerSlot& w : workers_) assign_params(w.policy, central_);
  ++iter_;
}

PolicyBundle Trainer::run() {
  while (iter_ < cfg_.iterations) iterate();
  return central_;
}

PolicyBundle distributed_train(const PolicyBundle& init, const EnvFactory& make_env,
                               const PpoConfig& cfg, std::vector<CurveRow>* curve) {
  Trainer t(init, make_env, cfg);
  PolicyBundle out = t.run();
  if (curve) *curve = t.curve();
  return out;
}

double evaluate_deterministic(const PolicyBundle& bundle, Env& env, int episodes,
                              core::Rng& g) {
  bundle.validate();
  require(episodes >= 1, "evaluate: need at least one episode");
  require(env.head_count() == static_cast<int>(bundle.heads.size()),
          "evaluate: environment and policy disagree on head count");
  env.set_training(false);
  const int n_heads = static_cast<int>(bundle.heads.size());
  std::vector<HeadAction> actions(n_heads);
  Vec obs, next_obs, hobs;
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    obs = env.reset(g);
    double ep = 0.0;
    for (;;) {
      for (int h = 0; h < n_heads; ++h) {
        const PolicyHead& head = bundle.heads[h];
        head.gather_obs(obs, hobs);
        if (head.kind == PolicyHead::Kind::gaussian)
          actions[h].cont = deterministic_continuous(head.gauss, hobs);
        else
          actions[h].choice = deterministic_discrete(head.disc, hobs);
      }
      StepResult res = env.step(actions, g, next_obs);
      double step_mean = 0.0;
      for (double r : res.reward) step_mean += r;
      ep += step_mean / n_heads;
      if (res.done) break;
      obs = next_obs;
    }
    total += ep;
  }
  return total / episodes;
}

}  // namespace rmc::rl
