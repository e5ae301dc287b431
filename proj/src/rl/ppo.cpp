#include "rmc/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "rmc/core/mlp.hpp"

namespace rmc::rl {

using core::Mlp;
using core::require;

void PpoConfig::validate() const {
  require(clip > 0.0, "ppo config: clip range must be positive");
  require(gamma > 0.0 && gamma < 1.0, "ppo config: gamma must be in (0,1)");
  require(lam > 0.0 && lam < 1.0, "ppo config: lambda must be in (0,1)");
  require(c1 >= 0.0 && c2 >= 0.0, "ppo config: loss weights must be nonnegative");
  require(lr > 0.0, "ppo config: learning rate must be positive");
  require(horizon >= 1 && workers >= 1, "ppo config: need at least one worker and one step");
  require(minibatch >= 1, "ppo config: minibatch must be positive");
  require(static_cast<long long>(minibatch) <= static_cast<long long>(workers) * horizon,
          "ppo config: minibatch cannot exceed workers*horizon");
  require(updates >= 1 && iterations >= 1, "ppo config: counts must be positive");
}

void HeadRollout::validate(const PolicyHead& head) const {
  const size_t n = static_cast<size_t>(obs.rows);
  require(obs.cols == head.obs_dim(), "rollout: observation width mismatch");
  require(log_prob.size() == n && advantage.size() == n && ret.size() == n,
          "rollout: misaligned transition fields");
  if (head.kind == PolicyHead::Kind::gaussian) {
    require(z.rows == obs.rows && z.cols == head.gauss.dims(), "rollout: draw shape mismatch");
  } else {
    require(choice.size() == n, "rollout: missing choices");
    for (int c : choice)
      require(c >= 0 && c < head.disc.choices(), "rollout: choice out of range");
  }
}

double mean_of(const Vec& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

namespace {

core::ParamSpans net_spans(Mlp& n) {
  core::ParamSpans s;
  for (size_t k = 0; k < n.w.size(); ++k) {
    s.emplace_back(n.w[k].a);
    s.emplace_back(n.b[k]);
  }
  return s;
}

core::GradSpans grad_spans(const Mlp& n) {
  core::GradSpans s;
  for (size_t k = 0; k < n.w.size(); ++k) {
    s.emplace_back(n.w[k].a);
    s.emplace_back(n.b[k]);
  }
  return s;
}

void zero_net(Mlp& n) {
  for (core::Mat& w : n.w) w.fill(0.0);
  for (Vec& b : n.b) std::fill(b.begin(), b.end(), 0.0);
}

constexpr double kHalfLog2Pi = 0.91893853320467274;

}  // namespace

PpoStats ppo_update(PolicyHead& head, const HeadRollout& data, const PpoConfig& cfg,
                    core::AdamState& actor_opt, core::AdamState& critic_opt, core::Rng& g) {
  head.validate();
  cfg.validate();
  data.validate(head);
  const int n = data.size();
  require(n >= cfg.minibatch, "ppo update: fewer transitions than one minibatch");

  Mlp& actor = head.actor_net();
  Mlp& critic = head.critic.net;
  Mlp actor_g = core::zeros_like(actor);
  Mlp critic_g = core::zeros_like(critic);

  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> batch;
  batch.reserve(cfg.minibatch);

  const int m = cfg.minibatch;
  const double inv_m = 1.0 / m;
  const bool gaussian = head.kind == PolicyHead::Kind::gaussian;
  const int k_dims = gaussian ? head.gauss.dims() : head.disc.choices();

  PpoStats stats;
  core::MlpTrace tr_a, tr_c;
  Vec dout_a, norm_adv(m), probs(k_dims), u_buf(k_dims), sig_buf(k_dims);
  std::vector<uint8_t> sat_buf(k_dims);

  for (int rep = 0; rep < cfg.updates; ++rep) {
    batch.clear();
    std::sample(pool.begin(), pool.end(), std::back_inserter(batch), m, g);

    double a_mean = 0.0;
    for (int i : batch) a_mean += data.advantage[i];
    a_mean *= inv_m;
    double a_var = 0.0;
    for (int i : batch) {
      const double d = data.advantage[i] - a_mean;
      a_var += d * d;
    }
    a_var *= inv_m;
    const bool normalize = a_var > 1e-12;
    const double a_std = std::sqrt(a_var) + 1e-8;
    for (int j = 0; j < m; ++j) {
      const double a = data.advantage[batch[j]];
      norm_adv[j] = normalize ? (a - a_mean) / a_std : a;
    }

    zero_net(actor_g);
    zero_net(critic_g);
    double sum_ratio = 0.0, sum_surr = 0.0, sum_vloss = 0.0, sum_ent = 0.0;
    int clipped_n = 0;

    for (int j = 0; j < m; ++j) {
      const int i = batch[j];
      const std::span<const double> obs = data.obs.row(i);
      const double adv = norm_adv[j];

      core::mlp_forward_cached(critic, obs, tr_c);
      const double verr = tr_c.act.back()[0] - data.ret[i];
      sum_vloss += verr * verr;
      const double dv[1] = {cfg.c1 * 2.0 * verr * inv_m};
      core::mlp_backward(critic, tr_c, dv, critic_g);

      core::mlp_forward_cached(actor, obs, tr_a);
      const Vec& out = tr_a.act.back();

      double logp = 0.0, entropy = 0.0;
      if (gaussian) {
        logp = gaussian_log_prob(out, data.z.row(i));
        for (int d = 0; d < k_dims; ++d) {
          bool sat = false;
          sig_buf[d] = policy_sigma(out[k_dims + d], &sat);
          sat_buf[d] = sat;
          u_buf[d] = (data.z(i, d) - out[d]) / sig_buf[d];
          entropy += std::log(sig_buf[d]);
        }
        entropy += 0.5 * k_dims + k_dims * kHalfLog2Pi;
      } else {
        const int a = data.choice[i];
        logp = logits_log_prob(out, a);
        double mx = out[0];
        for (double vv : out) mx = std::max(mx, vv);
        double lse = 0.0;
        for (int c = 0; c < k_dims; ++c) {
          probs[c] = std::exp(out[c] - mx);
          lse += probs[c];
        }
        for (double& p : probs) p /= lse;
        for (int c = 0; c < k_dims; ++c)
          if (probs[c] > 0.0) entropy -= probs[c] * std::log(probs[c]);
      }
      sum_ent += entropy;

      const double ratio = std::exp(logp - data.log_prob[i]);
      sum_ratio += ratio;
      if (std::abs(ratio - 1.0) > cfg.clip) ++clipped_n;
      const double unclipped = ratio * adv;
      const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * adv;
      sum_surr += -std::min(unclipped, clipped);

      // The surrogate only propagates through the unclipped branch of min.
      const double dlogp = (unclipped <= clipped ? -ratio * adv : 0.0) * inv_m;
      const double ent_w = cfg.c2 * inv_m;
      dout_a.assign(out.size(), 0.0);
      if (gaussian) {
        for (int d = 0; d < k_dims; ++d) {
          dout_a[d] = dlogp * u_buf[d] / sig_buf[d];
          if (!sat_buf[d]) dout_a[k_dims + d] = dlogp * (u_buf[d] * u_buf[d] - 1.0) - ent_w;
        }
      } else {
        const int a = data.choice[i];
        for (int c = 0; c < k_dims; ++c) {
          const double dh = probs[c] > 0.0 ? -probs[c] * (std::log(probs[c]) + entropy) : 0.0;
          dout_a[c] = dlogp * ((c == a ? 1.0 : 0.0) - probs[c]) - ent_w * dh;
        }
      }
      core::mlp_backward(actor, tr_a, dout_a, actor_g);
    }

    const double surr = sum_surr * inv_m;
    const double vloss = sum_vloss * inv_m;
    const double ent = sum_ent * inv_m;
    if (!std::isfinite(surr) || !std::isfinite(vloss) || !std::isfinite(ent)) {
      char msg[160];
      std::snprintf(msg, sizeof msg,
                    "ppo update repetition %d: non-finite loss (surrogate=%g value=%g entropy=%g)",
                    rep, surr, vloss, ent);
      throw core::NumericError(msg);
    }

    core::adam_update(actor_opt, net_spans(actor), grad_spans(actor_g), cfg.lr);
    core::adam_update(critic_opt, net_spans(critic), grad_spans(critic_g), cfg.lr);

    stats.ratio_mean.push_back(sum_ratio * inv_m);
    stats.clip_fraction.push_back(static_cast<double>(clipped_n) / m);
    stats.surrogate.push_back(surr);
    stats.value_loss.push_back(vloss);
    stats.entropy.push_back(ent);
  }
  return stats;
}

}  // namespace rmc::rl
