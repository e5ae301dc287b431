#include "rmc/rl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "rmc/core/checkpoint.hpp"
#include "rmc/core/types.hpp"

namespace rmc::rl {

using core::require;

namespace {

constexpr double kSigmaFloor = 1e-3;
constexpr double kLogSigmaCap = 4.0;
constexpr double kHalfLog2Pi = 0.91893853320467274;  // 0.5*ln(2*pi)

}  // namespace

void GaussianTanhPolicy::validate() const {
  require(!lo.empty() && lo.size() == hi.size(), "policy: bounds missing or mismatched");
  for (size_t i = 0; i < lo.size(); ++i)
    require(lo[i] < hi[i], "policy: lower bound must be below upper bound");
  require(net.layers() >= 1, "policy: network unset");
  require(net.out_dim() == 2 * dims(), "policy: network must emit (mu, log sigma) per dim");
}

double policy_sigma(double raw, bool* saturated) {
  const double s = std::exp(std::min(raw, kLogSigmaCap));
  if (saturated) *saturated = raw > kLogSigmaCap || s < kSigmaFloor;
  return s < kSigmaFloor ? kSigmaFloor : s;
}

static double squash(double z, double lo, double hi) {
  return 0.5 * (hi - lo) * std::tanh(z) + 0.5 * (hi + lo);
}

double gaussian_log_prob(const Vec& net_out, std::span<const double> z) {
  const int k = static_cast<int>(z.size());
  require(net_out.size() == 2 * z.size(), "gaussian_log_prob: output/draw width mismatch");
  double lp = 0.0;
  for (int i = 0; i < k; ++i) {
    const double sig = policy_sigma(net_out[k + i]);
    const double u = (z[i] - net_out[i]) / sig;
    lp += -0.5 * u * u - std::log(sig) - kHalfLog2Pi;
  }
  return lp;
}

ContinuousSample sample_continuous(const GaussianTanhPolicy& p, std::span<const double> s,
                                   Rng& g) {
  const int k = p.dims();
  const Vec out = core::mlp_forward(p.net, s);
  ContinuousSample r;
  r.action.resize(k);
  r.z.resize(k);
  for (int i = 0; i < k; ++i) {
    const double sig = policy_sigma(out[k + i]);
    const double z = core::normal(g, out[i], sig);
    r.z[i] = z;
    r.action[i] = squash(z, p.lo[i], p.hi[i]);
  }
  r.log_prob = gaussian_log_prob(out, r.z);
  return r;
}

Vec deterministic_continuous(const GaussianTanhPolicy& p, std::span<const double> s) {
  const int k = p.dims();
  const Vec out = core::mlp_forward(p.net, s);
  Vec a(k);
  for (int i = 0; i < k; ++i) a[i] = squash(out[i], p.lo[i], p.hi[i]);
  return a;
}

void DiscretePolicy::validate() const {
  require(net.layers() >= 1, "policy: network unset");
  require(net.out_dim() >= 2, "policy: need at least two choices");
  require(p_switch > 0.0 && p_switch <= 1.0, "policy: p_switch must be in (0,1]");
  for (double n : noise) require(n > 0.0 && n < 1.0, "policy: noise left (0,1)");
}

static double open_unit(Rng& g) {
  // log(-log n) needs n strictly inside (0,1); resample the endpoints away.
  for (;;) {
    const double u = core::uniform(g, 0.0, 1.0);
    if (u > 0.0 && u < 1.0) return u;
  }
}

DiscreteSample sample_discrete(DiscretePolicy& p, std::span<const double> s, Rng& g) {
  const int k = p.choices();
  const Vec logits = core::mlp_forward(p.net, s);

  if (p.noise.size() != static_cast<size_t>(k)) {
    p.noise.resize(k);
    for (double& n : p.noise) n = open_unit(g);
  } else if (core::uniform(g, 0.0, 1.0) < p.p_switch) {
    for (double& n : p.noise) n = open_unit(g);
  }

  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    const double pert = std::log(-std::log(p.noise[i]));
    const double v = logits[i] + (p.gumbel_sign ? -pert : pert);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }

  // Behavior density is the policy's own law over choices, not the noise
  // mechanism's: softmax of the unperturbed logits.
  return {best, logits_log_prob(logits, best)};
}

double logits_log_prob(const Vec& logits, int a) {
  require(a >= 0 && a < static_cast<int>(logits.size()), "logits_log_prob: index out of range");
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double lse = 0.0;
  for (double v : logits) lse += std::exp(v - mx);
  return logits[a] - mx - std::log(lse);
}

int deterministic_discrete(const DiscretePolicy& p, std::span<const double> s) {
  const Vec logits = core::mlp_forward(p.net, s);
  int best = 0;
  for (int i = 1; i < p.choices(); ++i)
    if (logits[i] > logits[best]) best = i;
  return best;
}

double value_of(const ValueNet& v, std::span<const double> s) {
  require(v.net.out_dim() == 1, "value net must emit a scalar");
  Vec out = core::mlp_forward(v.net, s);
  return out[0];
}

void PolicyHead::validate() const {
  if (kind == Kind::gaussian) {
    gauss.validate();
    require(gauss.net.in_dim() == obs_dim(), "head: actor input width != observation slice");
  } else {
    disc.validate();
    require(disc.net.in_dim() == obs_dim(), "head: actor input width != observation slice");
  }
  require(critic.net.layers() >= 1 && critic.net.out_dim() == 1, "head: critic must emit scalar");
  require(critic.net.in_dim() == obs_dim(), "head: critic input width != observation slice");
  require(!obs_idx.empty(), "head: empty observation slice");
  for (int i : obs_idx) require(i >= 0, "head: negative observation index");
}

void PolicyHead::gather_obs(std::span<const double> full, Vec& out) const {
  out.resize(obs_idx.size());
  for (size_t j = 0; j < obs_idx.size(); ++j) {
    require(obs_idx[j] < static_cast<int>(full.size()), "head: observation index out of range");
    out[j] = full[obs_idx[j]];
  }
}

void PolicyBundle::validate() const {
  require(!heads.empty(), "bundle: no heads");
  for (const PolicyHead& h : heads) h.validate();
}

static void assign_net(Mlp& dst, const Mlp& src) {
  require(dst.w.size() == src.w.size(), "assign_params: layer count mismatch");
  for (size_t k = 0; k < src.w.size(); ++k) {
    require(dst.w[k].size() == src.w[k].size() && dst.b[k].size() == src.b[k].size(),
            "assign_params: layer shape mismatch");
    dst.w[k].a = src.w[k].a;
    dst.b[k] = src.b[k];
  }
}

void assign_params(PolicyBundle& dst, const PolicyBundle& src) {
  require(dst.heads.size() == src.heads.size(), "assign_params: head count mismatch");
  for (size_t h = 0; h < src.heads.size(); ++h) {
    assign_net(dst.heads[h].actor_net(), src.heads[h].actor_net());
    assign_net(dst.heads[h].critic.net, src.heads[h].critic.net);
  }
}

static bool nets_equal(const Mlp& a, const Mlp& b) {
  if (a.w.size() != b.w.size()) return false;
  for (size_t k = 0; k < a.w.size(); ++k)
    if (a.w[k].a != b.w[k].a || a.b[k] != b.b[k]) return false;
  return true;
}

bool params_equal(const PolicyBundle& a, const PolicyBundle& b) {
  if (a.heads.size() != b.heads.size()) return false;
  for (size_t h = 0; h < a.heads.size(); ++h) {
    if (!nets_equal(a.heads[h].actor_net(), b.heads[h].actor_net())) return false;
    if (!nets_equal(a.heads[h].critic.net, b.heads[h].critic.net)) return false;
  }
  return true;
}

namespace {

void push_net(std::vector<core::ParamBlock>& blocks, const std::string& prefix, const Mlp& net) {
  char name[96];
  for (size_t k = 0; k < net.w.size(); ++k) {
    const core::Mat& w = net.w[k];
    std::snprintf(name, sizeof name, "%s.w%zu", prefix.c_str(), k);
    blocks.push_back({name,
                      {static_cast<uint64_t>(w.rows), static_cast<uint64_t>(w.cols)},
                      w.a});
    std::snprintf(name, sizeof name, "%s.b%zu", prefix.c_str(), k);
    blocks.push_back({name, {static_cast<uint64_t>(net.b[k].size())}, net.b[k]});
  }
}

Mlp read_net(const std::vector<core::ParamBlock>& blocks, const std::string& prefix) {
  Mlp net;
  char name[96];
  for (size_t k = 0;; ++k) {
    std::snprintf(name, sizeof name, "%s.w%zu", prefix.c_str(), k);
    const core::ParamBlock* wb = nullptr;
    for (const core::ParamBlock& b : blocks)
      if (b.name == name) wb = &b;
    if (!wb) break;
    require(wb->dims.size() == 2, "policy checkpoint: weight block must be 2-d");
    core::Mat w(static_cast<int>(wb->dims[0]), static_cast<int>(wb->dims[1]));
    w.a = wb->data;
    std::snprintf(name, sizeof name, "%s.b%zu", prefix.c_str(), k);
    const core::ParamBlock& bb = core::find_block(blocks, name);
    net.w.push_back(std::move(w));
    net.b.push_back(bb.data);
  }
  require(net.layers() >= 1, "policy checkpoint: missing network " + prefix);
  return net;
}

}  // namespace

void save_policy_bundle(const PolicyBundle& b, const std::string& path) {
  b.validate();
  std::vector<core::ParamBlock> blocks;
  blocks.push_back({"bundle.meta", {1}, Vec{static_cast<double>(b.heads.size())}});
  char name[96];
  for (size_t h = 0; h < b.heads.size(); ++h) {
    const PolicyHead& head = b.heads[h];
    std::snprintf(name, sizeof name, "h%zu.meta", h);
    blocks.push_back({name,
                      {4},
                      Vec{head.kind == PolicyHead::Kind::gaussian ? 0.0 : 1.0,
                          head.disc.p_switch, head.disc.gumbel_sign ? 1.0 : 0.0,
                          static_cast<double>(head.obs_idx.size())}});
    Vec idx(head.obs_idx.begin(), head.obs_idx.end());
    std::snprintf(name, sizeof name, "h%zu.obs_idx", h);
    blocks.push_back({name, {static_cast<uint64_t>(idx.size())}, idx});
    if (head.kind == PolicyHead::Kind::gaussian) {
      std::snprintf(name, sizeof name, "h%zu.lo", h);
      blocks.push_back({name, {static_cast<uint64_t>(head.gauss.lo.size())}, head.gauss.lo});
      std::snprintf(name, sizeof name, "h%zu.hi", h);
      blocks.push_back({name, {static_cast<uint64_t>(head.gauss.hi.size())}, head.gauss.hi});
    }
    std::snprintf(name, sizeof name, "h%zu.actor", h);
    push_net(blocks, name, head.actor_net());
    std::snprintf(name, sizeof name, "h%zu.critic", h);
    push_net(blocks, name, head.critic.net);
  }
  core::save_checkpoint(path, blocks);
}

PolicyBundle load_policy_bundle(const std::string& path) {
  const std::vector<core::ParamBlock> blocks = core::load_checkpoint(path);
  const core::ParamBlock& meta = core::find_block(blocks, "bundle.meta");
  const size_t n_heads = static_cast<size_t>(meta.data.at(0));
  PolicyBundle b;
  char name[96];
  for (size_t h = 0; h < n_heads; ++h) {
    PolicyHead head;
    std::snprintf(name, sizeof name, "h%zu.meta", h);
    const Vec& hm = core::find_block(blocks, name).data;
    head.kind = hm.at(0) == 0.0 ? PolicyHead::Kind::gaussian : PolicyHead::Kind::discrete;
    std::snprintf(name, sizeof name, "h%zu.obs_idx", h);
    const Vec& idx = core::find_block(blocks, name).data;
    head.obs_idx.assign(idx.begin(), idx.end());
    std::snprintf(name, sizeof name, "h%zu.actor", h);
    const Mlp actor = read_net(blocks, name);
    if (head.kind == PolicyHead::Kind::gaussian) {
      std::snprintf(name, sizeof name, "h%zu.lo", h);
      head.gauss.lo = core::find_block(blocks, name).data;
      std::snprintf(name, sizeof name, "h%zu.hi", h);
      head.gauss.hi = core::find_block(blocks, name).data;
      head.gauss.net = actor;
    } else {
      head.disc.net = actor;
      head.disc.p_switch = hm.at(1);
      head.disc.gumbel_sign = hm.at(2) != 0.0;
    }
    std::snprintf(name, sizeof name, "h%zu.critic", h);
    head.critic.net = read_net(blocks, name);
    b.heads.push_back(std::move(head));
  }
  b.validate();
  return b;
}

}  // namespace rmc::rl
