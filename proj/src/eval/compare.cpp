#include "rmc/eval/compare.hpp"

#include <cmath>

#include "rmc/core/rng.hpp"

namespace rmc::eval {

using core::require;

void ControllerSpec::validate(int rooms) const {
  require(!id.empty(), "controller spec: empty id");
  if (kind == Kind::rule) {
    rule.validate();
    return;
  }
  require(static_cast<int>(blinds.heads.size()) == rooms,
          "controller spec: one blind head per room");
  for (const rl::PolicyHead& h : blinds.heads)
    require(h.kind == rl::PolicyHead::Kind::discrete, "controller spec: blind heads are discrete");
  blinds.validate();
  if (kind == Kind::full_policy) {
    require(supply.heads.size() == 1 &&
                supply.heads[0].kind == rl::PolicyHead::Kind::gaussian,
            "controller spec: full policy needs one continuous supply head");
    supply.validate();
  } else {
    rule.validate();  // room policies run under this supply rule
  }
}

namespace {

MetricReport run_pair(const ControllerSpec& ctrl, const ModelSpec& model,
                      const EvalSetup& setup) {
  const int nr = static_cast<int>(setup.rooms.size());
  const int steps_per_day = 144;
  const int steps = setup.days * steps_per_day;

  rl::BuildingEnvConfig cfg;
  cfg.reward = setup.reward;
  cfg.episode_steps = steps;
  cfg.profile = setup.profile;
  cfg.weather_seed = setup.weather_seed;
  if (ctrl.kind == ControllerSpec::Kind::full_policy) {
    cfg.supervisory = true;
    cfg.blind_heads = ctrl.blinds.heads;
  } else {
    cfg.supply_rule = make_supply_rule(ctrl.rule);
  }

  rl::BuildingEnv env(model.model, setup.history, setup.rooms, cfg);
  env.set_training(false);
  core::Rng g(core::derive_seed(setup.weather_seed, ctrl.id + "|" + model.id));
  Vec obs = env.reset(g);

  Mat temps(steps, nr);
  MetricReport rep;
  std::vector<rl::HeadAction> actions(env.head_count());
  Vec head_obs;
  for (int t = 0; t < steps; ++t) {
    switch (ctrl.kind) {
      case ControllerSpec::Kind::rule: {
        const Vec& rt = env.room_temps();
        for (int i = 0; i < nr; ++i)
          actions[i].choice = blind_rule(ctrl.rule.blinds, setup.rooms[i].orientation, rt[i],
                                         env.current_irr(), env.current_hour());
        break;
      }
      case ControllerSpec::Kind::room_policy:
        for (int i = 0; i < nr; ++i) {
          ctrl.blinds.heads[i].gather_obs(obs, head_obs);
          actions[i].choice = rl::deterministic_discrete(ctrl.blinds.heads[i].disc, head_obs);
        }
        break;
      case ControllerSpec::Kind::full_policy:
        ctrl.supply.heads[0].gather_obs(obs, head_obs);
        actions[0].cont = rl::deterministic_continuous(ctrl.supply.heads[0].gauss, head_obs);
        break;
    }
    env.step(actions, g, obs);
    const Vec& rt = env.room_temps();
    for (int i = 0; i < nr; ++i) temps(t, i) = rt[i];
    const auto [heat, cool] = env.last_energy();
    rep.heat_kwh += heat;
    rep.cool_kwh += cool;
  }

  const ComfortStats cs = comfort_metrics(temps, steps_per_day);
  rep.controller = ctrl.id;
  rep.model = model.id;
  rep.days = setup.days;
  rep.mdev = cs.mdev;
  rep.n_hot = cs.n_hot;
  rep.n_cold = cs.n_cold;
  rep.validate();
  return rep;
}

}  // namespace

std::vector<MetricReport> compare(const std::vector<ControllerSpec>& controllers,
                                  const std::vector<ModelSpec>& models, const EvalSetup& setup) {
  require(!controllers.empty() && !models.empty(), "compare: nothing to evaluate");
  require(setup.days >= 1, "compare: period must cover at least a day");
  require(setup.history != nullptr, "compare: missing history");
  const int nr = static_cast<int>(setup.rooms.size());
  for (const ControllerSpec& c : controllers) c.validate(nr);
  for (const ModelSpec& m : models) require(m.model != nullptr, "compare: missing model");

  std::vector<MetricReport> out;
  out.reserve(controllers.size() * models.size());
  for (const ControllerSpec& c : controllers)
    for (const ModelSpec& m : models) out.push_back(run_pair(c, m, setup));
  return out;
}

MetricReport model_accuracy(const std::string& model_id, const sysid::ReducedModel& model,
                            const sim::EpisodeDataset& data, int horizon, bool unit_circle) {
  require(horizon >= 1, "model accuracy: empty horizon");
  const int usable = data.steps() - model.n - horizon;
  require(usable >= 0, "model accuracy: dataset shorter than window plus horizon");
  const int segments = std::min(usable + 1, 16);

  Vec err(model.d_obs, 0.0);
  double radius = 0.0;
  for (int s = 0; s < segments; ++s) {
    const int t0 = segments == 1 ? 0 : s * (usable / (segments - 1));
    const Mat pred = model.predict_segment(data, t0, horizon);
    Mat truth(horizon, model.d_obs);
    for (int r = 0; r < horizon; ++r)
      for (int c = 0; c < model.d_obs; ++c) truth(r, c) = data.obs(t0 + model.n + r, c);
    const Vec e = mae(pred, truth);
    for (int c = 0; c < model.d_obs; ++c) err[c] += e[c];
    if (unit_circle) {
      require(model.d_obs >= 2, "model accuracy: unit-circle score needs two channels");
      Vec x(horizon), y(horizon);
      for (int r = 0; r < horizon; ++r) {
        x[r] = pred(r, 0);
        y[r] = pred(r, 1);
      }
      radius += mean_radius_error(x, y);
    }
  }

  MetricReport rep;
  rep.controller = "-";
  rep.model = model_id;
  rep.channel_mae.assign(err.begin(), err.end());
  for (double& v : rep.channel_mae) v /= segments;
  rep.radius_error = unit_circle ? radius / segments : 0.0;
  rep.validate();
  return rep;
}

}  // namespace rmc::eval
