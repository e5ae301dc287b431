#include "rmc/rl/building_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rmc/core/mlp.hpp"

namespace rmc::rl {

using core::require;

SupplyCommand baseline_supply(double t_out) {
  SupplyCommand s;
  s.t_heat = std::clamp(38.0 - 0.6 * t_out, 25.0, 55.0);
  s.t_cool = 12.0;
  s.t_air = 21.0;
  s.c_r = 1.0;
  return s;
}

int building_obs_dim(int rooms, int floors) { return 2 * rooms + floors + 6; }

std::vector<int> room_head_channels(int room, int rooms, int floors) {
  const int shared = rooms + floors + 1;  // first weather channel
  return {room, shared, shared + 1, shared + 2, shared + 3, shared + 4 + room};
}

std::vector<int> supervisory_channels(int rooms, int floors) {
  std::vector<int> idx;
  for (int f = 0; f < floors; ++f) idx.push_back(rooms + f);
  const int shared = rooms + floors;
  idx.push_back(shared);      // building mean
  idx.push_back(shared + 1);  // outdoor temperature
  idx.push_back(shared + 2);  // irradiance
  idx.push_back(shared + 3);  // sin hour
  idx.push_back(shared + 4);  // cos hour
  idx.push_back(2 * rooms + floors + 5);  // changeover mode
  return idx;
}

BuildingEnv::BuildingEnv(std::shared_ptr<const sysid::ReducedModel> model,
                         std::shared_ptr<const sim::EpisodeDataset> history,
                         std::vector<sim::RoomSpec> rooms, const BuildingEnvConfig& cfg)
    : model_(std::move(model)), hist_(std::move(history)), rooms_(std::move(rooms)), cfg_(cfg) {
  require(model_ != nullptr && hist_ != nullptr, "building env: missing model or history");
  const int nr = static_cast<int>(rooms_.size());
  require(nr >= 1, "building env: no rooms");
  require(model_->d_obs == nr, "building env: model observes a different room count");
  require(model_->d_cmd == 2 * nr + 3 && model_->d_ext == 2,
          "building env: model command layout mismatch");
  require(hist_->d_cmd() == model_->d_cmd && hist_->d_ext() == model_->d_ext &&
              hist_->d_obs() == model_->d_obs,
          "building env: history layout mismatch");
  require(hist_->steps() >= model_->n + 1, "building env: history shorter than encode window");
  require(cfg_.episode_steps >= 1, "building env: episode must have steps");
  cfg_.reward.validate();
  cfg_.noise.validate();
  for (const sim::RoomSpec& r : rooms_) n_floors_ = std::max(n_floors_, r.floor + 1);
  if (cfg_.supervisory) {
    require(cfg_.blind_heads.size() == static_cast<size_t>(nr),
            "building env: need one frozen blind head per room");
    for (const PolicyHead& h : cfg_.blind_heads) {
      require(h.kind == PolicyHead::Kind::discrete, "building env: blind heads must be discrete");
      h.validate();
      for (int idx : h.obs_idx)
        require(idx < building_obs_dim(nr, n_floors_),
                "building env: blind head reads past observation");
    }
  }
  noise_ = cfg_.noise;
  noise_.x.assign(nr, cfg_.noise.drift);
  zbuf_.assign(static_cast<size_t>(4) * model_->net.dec.hidden, 0.0);
}

int BuildingEnv::obs_dim() const {
  return building_obs_dim(static_cast<int>(rooms_.size()), n_floors_);
}

int BuildingEnv::head_count() const {
  return cfg_.supervisory ? 1 : static_cast<int>(rooms_.size());
}

double BuildingEnv::current_t_out() const {
  return weather_.t_out[std::min(t_, static_cast<int>(weather_.t_out.size()) - 1)];
}

double BuildingEnv::current_irr() const {
  return weather_.irr[std::min(t_, static_cast<int>(weather_.irr.size()) - 1)];
}

double BuildingEnv::current_hour() const {
  return sim::step_hour(weather_, std::min(t_, static_cast<int>(weather_.t_out.size()) - 1));
}

Vec BuildingEnv::reset(core::Rng& g) {
  const int nr = static_cast<int>(rooms_.size());
  char label[32];
  std::snprintf(label, sizeof label, "episode-%d", episode_);
  ++episode_;
  weather_ = sim::gen_weather(cfg_.profile, core::derive_seed(cfg_.weather_seed, label),
                              cfg_.episode_steps + 1);

  const int start = core::uniform_int(g, 0, hist_->steps() - model_->n);
  core::Mat window(model_->n, hist_->d_total());
  for (int r = 0; r < model_->n; ++r) hist_->fill_x(start + r, window.row(r));
  auto [c, h] = model_->encode(window);
  dec_state_.c = std::move(c);
  dec_state_.h = std::move(h);

  temps_.assign(nr, 0.0);
  pred_norm_.assign(nr, 0.0);
  const int obs_base = model_->d_sharp();
  for (int i = 0; i < nr; ++i) {
    temps_[i] = hist_->obs(start + model_->n - 1, i);
    pred_norm_[i] = model_->norm.fwd(obs_base + i, temps_[i]);
  }

  closing_ring_.assign(nr, Vec(weather_.steps_per_day, 0.0));
  closing_sum_.assign(nr, 0.0);
  ring_pos_ = 0;
  noise_.reset();
  const double demand = sim::changeover_demand(temps_, cfg_.setpoint);
  if (demand != 0.0) cooling_ = demand > 0.0;
  t_ = 0;
  return observation();
}

Vec BuildingEnv::observation() const {
  const int nr = static_cast<int>(rooms_.size());
  Vec obs(building_obs_dim(nr, n_floors_), 0.0);
  Vec floor_sum(n_floors_, 0.0), floor_n(n_floors_, 0.0);
  double total = 0.0;
  for (int i = 0; i < nr; ++i) {
    obs[i] = pred_norm_[i];
    floor_sum[rooms_[i].floor] += pred_norm_[i];
    floor_n[rooms_[i].floor] += 1.0;
    total += pred_norm_[i];
  }
  for (int f = 0; f < n_floors_; ++f) obs[nr + f] = floor_sum[f] / floor_n[f];
  int k = nr + n_floors_;
  obs[k++] = total / nr;
  const int t = std::min(t_, static_cast<int>(weather_.t_out.size()) - 1);
  obs[k++] = model_->norm.fwd(2 * nr + 3, weather_.t_out[t]);
  obs[k++] = model_->norm.fwd(2 * nr + 4, weather_.irr[t]);
  const double hour = sim::step_hour(weather_, t);
  obs[k++] = std::sin(2.0 * 3.14159265358979323846 * hour / 24.0);
  obs[k++] = std::cos(2.0 * 3.14159265358979323846 * hour / 24.0);
  for (int i = 0; i < nr; ++i) obs[k++] = closing_sum_[i] / 24.0;
  obs[k] = cooling_ ? 1.0 : -1.0;
  return obs;
}

void BuildingEnv::advance_model(const sim::BuildingCommand& cmd, double t_out, double irr,
                                core::Rng& g) {
  const int nr = static_cast<int>(rooms_.size());
  xbuf_.assign(model_->d_sharp(), 0.0);
  for (int i = 0; i < nr; ++i) {
    xbuf_[i] = cmd.valve[i];
    xbuf_[nr + i] = cmd.blind[i];
  }
  xbuf_[2 * nr] = cmd.t_flow;
  xbuf_[2 * nr + 1] = cmd.t_air;
  xbuf_[2 * nr + 2] = cmd.c_r;
  xbuf_[2 * nr + 3] = t_out;
  xbuf_[2 * nr + 4] = irr;
  for (int ch = 0; ch < model_->d_sharp(); ++ch) xbuf_[ch] = model_->norm.fwd(ch, xbuf_[ch]);

  core::lstm_step(model_->net.dec, xbuf_, dec_state_, zbuf_);
  core::mlp_forward(model_->net.head, dec_state_.h, pred_norm_);

  if (training_) {
    const Vec& pert = obs_noise_step(noise_, 1.0, g);
    for (int i = 0; i < nr; ++i) pred_norm_[i] += pert[i];
  }
  const int obs_base = model_->d_sharp();
  for (int i = 0; i < nr; ++i) temps_[i] = model_->norm.inv(obs_base + i, pred_norm_[i]);
}

StepResult BuildingEnv::step(const std::vector<HeadAction>& actions, core::Rng& g,
                             Vec& next_obs) {
  const int nr = static_cast<int>(rooms_.size());
  require(static_cast<int>(actions.size()) == head_count(),
          "building env: wrong action head count");
  require(t_ < cfg_.episode_steps, "building env: episode already finished");

  sim::BuildingCommand cmd;
  cmd.valve.assign(nr, 0.0);
  cmd.blind.assign(nr, 0);

  if (cfg_.supervisory) {
    require(actions[0].cont.size() == 4, "building env: supply head must emit four values");
    const Vec cur = observation();
    Vec hobs;
    for (int i = 0; i < nr; ++i) {
      cfg_.blind_heads[i].gather_obs(cur, hobs);
      cmd.blind[i] = deterministic_discrete(cfg_.blind_heads[i].disc, hobs);
    }
  } else {
    for (int i = 0; i < nr; ++i) {
      require(actions[i].choice >= 0 && actions[i].choice <= 4,
              "building env: blind position out of range");
      cmd.blind[i] = actions[i].choice;
    }
  }

  const int t = std::min(t_, static_cast<int>(weather_.t_out.size()) - 1);
  const double t_out = weather_.t_out[t];
  const double irr = weather_.irr[t];

  double t_heat, t_cool;
  if (cfg_.supervisory) {
    t_heat = actions[0].cont[0];
    t_cool = actions[0].cont[1];
    cmd.t_air = actions[0].cont[2];
    cmd.c_r = actions[0].cont[3];
  } else {
    SupplyCommand s;
    if (cfg_.supply_rule) {
      SupplyContext ctx;
      ctx.t_out = t_out;
      ctx.irr = irr;
      ctx.hour = sim::step_hour(weather_, t);
      ctx.cooling = cooling_;
      ctx.room_temps = temps_;
      s = cfg_.supply_rule(ctx);
    } else {
      s = baseline_supply(t_out);
    }
    t_heat = s.t_heat;
    t_cool = s.t_cool;
    cmd.t_air = s.t_air;
    cmd.c_r = s.c_r;
  }

  const double demand = sim::changeover_demand(temps_, cfg_.setpoint);
  if (demand != 0.0) cooling_ = demand > 0.0;
  cmd.t_flow = cooling_ ? t_cool : t_heat;
  cmd.valve = sim::thermostat_valves(temps_, cfg_.setpoint, cooling_);

  // Energy estimate with the plant's own split, on the surrogate's temps.
  const sim::StepEnergy pw = sim::building_power(rooms_, temps_, cmd, t_out);
  const double kwh = weather_.dt / 3.6e6;
  e_heat_ = (std::max(pw.coil_w, 0.0) + std::max(pw.ahu_w, 0.0)) * kwh;
  e_cool_ = (std::max(-pw.coil_w, 0.0) + std::max(-pw.ahu_w, 0.0)) * kwh;
  const double e_heat = e_heat_;
  const double e_cool = e_cool_;

  advance_model(cmd, t_out, irr, g);

  const double step_h = weather_.dt / 3600.0;
  for (int i = 0; i < nr; ++i) {
    const double closed = cmd.blind[i] / 4.0 * step_h;
    closing_sum_[i] += closed - closing_ring_[i][ring_pos_];
    closing_ring_[i][ring_pos_] = closed;
  }
  ring_pos_ = (ring_pos_ + 1) % weather_.steps_per_day;
  ++t_;

  StepResult res;
  if (cfg_.supervisory) {
    Vec floor_sum(n_floors_, 0.0), floor_n(n_floors_, 0.0);
    for (int i = 0; i < nr; ++i) {
      floor_sum[rooms_[i].floor] += temps_[i];
      floor_n[rooms_[i].floor] += 1.0;
    }
    Vec floor_means(n_floors_, 0.0);
    for (int f = 0; f < n_floors_; ++f) floor_means[f] = floor_sum[f] / floor_n[f];
    // ventilation zones coincide with floors in this plant
    res.reward = {reward_global(cfg_.reward, floor_means, floor_means, temps_, e_cool, e_heat)};
  } else {
    res.reward.resize(nr);
    for (int i = 0; i < nr; ++i)
      res.reward[i] = reward_room(cfg_.reward, temps_[i], closing_sum_[i]);
  }
  res.done = t_ >= cfg_.episode_steps;
  next_obs = observation();
  return res;
}

PolicyBundle make_blind_policy(int rooms, int floors, const std::vector<int>& hidden,
                               double p_switch, core::Rng& g) {
  PolicyBundle b;
  for (int i = 0; i < rooms; ++i) {
    PolicyHead head;
    head.kind = PolicyHead::Kind::discrete;
    head.obs_idx = room_head_channels(i, rooms, floors);
    const int in = static_cast<int>(head.obs_idx.size());
    std::vector<int> actor_sizes{in};
    actor_sizes.insert(actor_sizes.end(), hidden.begin(), hidden.end());
    actor_sizes.push_back(5);
    head.disc.net = core::Mlp::zeros(actor_sizes);
    head.disc.net.init(g);
    head.disc.p_switch = p_switch;
    std::vector<int> critic_sizes{in};
    critic_sizes.insert(critic_sizes.end(), hidden.begin(), hidden.end());
    critic_sizes.push_back(1);
    head.critic.net = core::Mlp::zeros(critic_sizes);
    head.critic.net.init(g);
    b.heads.push_back(std::move(head));
  }
  return b;
}

PolicyBundle make_supply_policy(int rooms, int floors, const std::vector<int>& hidden,
                                core::Rng& g) {
  PolicyHead head;
  head.kind = PolicyHead::Kind::gaussian;
  head.obs_idx = supervisory_channels(rooms, floors);
  head.gauss.lo = {25.0, 8.0, 12.0, 0.5};
  head.gauss.hi = {55.0, 18.0, 30.0, 3.0};
  const int in = static_cast<int>(head.obs_idx.size());
  std::vector<int> actor_sizes{in};
  actor_sizes.insert(actor_sizes.end(), hidden.begin(), hidden.end());
  actor_sizes.push_back(8);
  head.gauss.net = core::Mlp::zeros(actor_sizes);
  head.gauss.net.init(g);
  std::vector<int> critic_sizes{in};
  critic_sizes.insert(critic_sizes.end(), hidden.begin(), hidden.end());
  critic_sizes.push_back(1);
  head.critic.net = core::Mlp::zeros(critic_sizes);
  head.critic.net.init(g);
  PolicyBundle b;
  b.heads.push_back(std::move(head));
  return b;
}

}  // namespace rmc::rl
