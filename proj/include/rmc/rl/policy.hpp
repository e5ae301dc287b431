#pragma once

#include <span>
#include <string>
#include <vector>

#include "rmc/core/mlp.hpp"
#include "rmc/core/rng.hpp"

namespace rmc::rl {

using core::Mlp;
using core::Rng;
using core::Vec;

// Stochastic policy over box-bounded actions. The network maps a state to
// [mu_0..mu_{k-1}, s_0..s_{k-1}]; sigma_i = exp(s_i) floored at 1e-3. Draws
// are squashed with tanh into (lo_i, hi_i). Log-densities are taken in the
// pre-squash space for both behavior and current policy, so the squash
// Jacobian cancels in importance ratios.
struct GaussianTanhPolicy {
  Mlp net;
  Vec lo, hi;

  int dims() const { return static_cast<int>(lo.size()); }
  void validate() const;
};

struct ContinuousSample {
  Vec action;  // squashed, strictly inside the bounds
  Vec z;       // pre-squash draw, what log_prob refers to
  double log_prob = 0.0;
};

ContinuousSample sample_continuous(const GaussianTanhPolicy& p, std::span<const double> s,
                                   Rng& g);
Vec deterministic_continuous(const GaussianTanhPolicy& p, std::span<const double> s);

// Maps the raw network output to sigma: exp, capped above, floored at 1e-3.
// `saturated`, when given, is set when the cap or floor is active (the raw
// output then gets zero gradient).
double policy_sigma(double raw, bool* saturated = nullptr);

// Log-density of a pre-squash draw z under a head output [mu, raw sigma].
// Both the rollout draw and the update recompute go through this one
// function so equal parameters give bitwise-equal log-probs.
double gaussian_log_prob(const Vec& net_out, std::span<const double> z);

// log softmax(logits)[a]; shared between sampling and the update for the
// same reason.
double logits_log_prob(const Vec& logits, int a);

// Discrete policy with persistent exploration noise: one n_i in (0,1) per
// choice, renewed wholesale with probability p_switch each step and otherwise
// held, so exploratory picks persist for ~1/p_switch steps. Training action is
// argmax over logits perturbed by log(-log n_i); gumbel_sign flips the
// perturbation to the conventional -log(-log n_i) form.
struct DiscretePolicy {
  Mlp net;
  double p_switch = 0.25;
  bool gumbel_sign = false;  // false: perturb with log(-log n); true: -log(-log n)
  Vec noise;                 // lazily sized on first draw

  int choices() const { return net.out_dim(); }
  void validate() const;
};

struct DiscreteSample {
  int action = 0;
  double log_prob = 0.0;  // log softmax(logits)[action]
};

DiscreteSample sample_discrete(DiscretePolicy& p, std::span<const double> s, Rng& g);
int deterministic_discrete(const DiscretePolicy& p, std::span<const double> s);

struct ValueNet {
  Mlp net;
};

double value_of(const ValueNet& v, std::span<const double> s);

// One action head: its own actor, critic, and view of the environment
// observation. An agent is a bundle of heads acting jointly; the building
// uses one head per room plus one supervisory head, the pendulum just one.
struct PolicyHead {
  enum class Kind { gaussian, discrete };

  Kind kind = Kind::gaussian;
  GaussianTanhPolicy gauss;
  DiscretePolicy disc;
  ValueNet critic;
  std::vector<int> obs_idx;  // channels of the env observation this head reads

  Mlp& actor_net() { return kind == Kind::gaussian ? gauss.net : disc.net; }
  const Mlp& actor_net() const { return kind == Kind::gaussian ? gauss.net : disc.net; }
  int obs_dim() const { return static_cast<int>(obs_idx.size()); }
  void validate() const;
  void gather_obs(std::span<const double> full, Vec& out) const;
};

struct PolicyBundle {
  std::vector<PolicyHead> heads;

  void validate() const;
};

// Copies learnable parameters from src into dst, leaving exploration state
// (persistent noise) alone. Shapes must match.
void assign_params(PolicyBundle& dst, const PolicyBundle& src);

bool params_equal(const PolicyBundle& a, const PolicyBundle& b);

void save_policy_bundle(const PolicyBundle& b, const std::string& path);
PolicyBundle load_policy_bundle(const std::string& path);

}  // namespace rmc::rl
