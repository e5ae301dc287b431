#include "rmc/sysid/retrain.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "rmc/core/encdec.hpp"
#include "rmc/sim/rollout.hpp"

namespace rmc::sysid {

using core::require;

void StoppingSet::validate() const {
  require(!env.empty() && !cmd.empty(), "stopping set: needs at least one pair");
  require(static_cast<int>(prefix.size()) == pairs(), "stopping set: one prefix per pair");
  const int steps = env.front().rows;
  require(steps >= 1, "stopping set: empty sequences");
  for (const auto& e : env)
    require(e.rows == steps && e.cols == env.front().cols, "stopping set: ragged env");
  for (const auto& c : cmd)
    require(c.rows == steps && c.cols == cmd.front().cols, "stopping set: ragged cmd");
  for (const auto& p : prefix)
    require(p.rows == prefix.front().rows && p.cols == prefix.front().cols && p.rows >= 1,
            "stopping set: ragged prefixes");
}

Mat StoppingSet::x_sharp(int ei, int ci) const {
  const Mat& e = env.at(ei);
  const Mat& c = cmd.at(ci);
  Mat xs(c.rows, c.cols + e.cols);
  for (int t = 0; t < c.rows; ++t) {
    for (int j = 0; j < c.cols; ++j) xs(t, j) = c(t, j);
    for (int j = 0; j < e.cols; ++j) xs(t, c.cols + j) = e(t, j);
  }
  return xs;
}

double discrepancy(const ReducedModel& a, const ReducedModel& b, const StoppingSet& set) {
  set.validate();
  require(a.d_cmd == b.d_cmd && a.d_ext == b.d_ext && a.d_obs == b.d_obs && a.n == b.n,
          "discrepancy: models have different shapes");
  require(set.cmd.front().cols == a.d_cmd && set.env.front().cols == a.d_ext,
          "discrepancy: probe width mismatch");
  require(set.prefix.front().rows == a.n && set.prefix.front().cols == a.d(),
          "discrepancy: prefix shape mismatch");

  double acc = 0.0;
  size_t count = 0;
  for (size_t ei = 0; ei < set.env.size(); ++ei)
    for (size_t ci = 0; ci < set.cmd.size(); ++ci) {
      const Mat& pre = set.prefix[ei * set.cmd.size() + ci];
      const Mat xs = set.x_sharp(static_cast<int>(ei), static_cast<int>(ci));
      const auto [ca, ha] = a.encode(pre);
      const auto [cb, hb] = b.encode(pre);
      const Mat oa = a.decode(ca, ha, xs);
      const Mat ob = b.decode(cb, hb, xs);
      for (size_t i = 0; i < oa.size(); ++i) acc += std::fabs(oa.a[i] - ob.a[i]);
      count += oa.size();
    }
  return acc / count;
}

void RetrainConfig::validate() const {
  require(delta_max >= 0.0, "retrain: delta bound must be >= 0");
  require(n_max >= 0, "retrain: n_max must be >= 0");
  require(p_eval >= 1, "retrain: p_eval must be >= 1");
  require(n_max == 0 || 10 * p_eval <= n_max,
          "retrain: the budget must cover at least ten evaluations");
  require(batch >= 1, "retrain: batch must be >= 1");
  require(lr > 0.0 && clip_norm > 0.0, "retrain: lr and clip_norm must be positive");
  require(mu > 0.0 && mu < 1.0, "retrain: mu must lie in (0, 1)");
}

namespace {

void check_inputs(const ReducedModel& model, const sim::EpisodeDataset& hist,
                  const RetrainConfig& cfg, const StoppingSet& set) {
  cfg.validate();
  model.validate();
  set.validate();
  hist.validate();
  require(hist.d_cmd() == model.d_cmd && hist.d_ext() == model.d_ext &&
              hist.d_obs() == model.d_obs,
          "retrain: dataset layout mismatch");
  if (hist.steps() < model.n + model.l)
    throw std::domain_error("retrain: history shorter than one n+l window");
}

void fill_batch(std::vector<core::SeqSample>& batch, const sim::EpisodeDataset& hist,
                const ReducedModel& m, core::Rng& g) {
  const int last_start = hist.steps() - (m.n + m.l);
  for (auto& s : batch) s = make_sample(hist, m.norm, core::uniform_int(g, 0, last_start), m.n, m.l);
}

double grad_step_loss(const core::EncDecNet& net, std::span<const core::SeqSample> batch,
                      core::EncDecNet& grads, core::BatchWorkspace& ws, int n_iter) {
  double loss;
  try {
    loss = core::batch_gradients(net, batch, core::LossKind::squared, grads, ws);
  } catch (const core::NumericError& e) {
    throw core::NumericError("retrain iteration " + std::to_string(n_iter) + ": " + e.what());
  }
  if (!std::isfinite(loss))
    throw core::NumericError("retrain iteration " + std::to_string(n_iter) + ": non-finite loss");
  return loss;
}

void finish_trace(RetrainTrace& t, const ReducedModel& frozen, const ReducedModel& current,
                  const StoppingSet& set) {
  t.final_delta = t.records.empty() ? discrepancy(frozen, current, set)
                                    : t.records.back().delta;
}

}  // namespace

std::pair<ReducedModel, RetrainTrace> retrain_full(const ReducedModel& model,
                                                   const sim::EpisodeDataset& hist,
                                                   const RetrainConfig& cfg,
                                                   const StoppingSet& set) {
  require(cfg.algorithm == RetrainAlgo::full, "retrain_full: config declares another algorithm");
  check_inputs(model, hist, cfg, set);

  ReducedModel out = model;
  RetrainTrace trace;
  core::Rng g(core::derive_seed(cfg.seed, "retrain-full"));
  core::EncDecNet grads = out.net.zeros_like();
  core::AdamState adam(out.net.param_count());
  auto ws = core::make_workspace();
  std::vector<core::SeqSample> batch(cfg.batch);

  int n_iter = 0;
  while (true) {
    if (n_iter + 1 > cfg.n_max) {
      trace.exit_reason = "iteration-cap";
      break;
    }
    fill_batch(batch, hist, out, g);
    grad_step_loss(out.net, batch, grads, *ws, n_iter);
    core::clip_grad_norm(grads.param_spans(), cfg.clip_norm);
    core::adam_update(adam, out.net.param_spans(), std::as_const(grads).param_spans(), cfg.lr);
    ++n_iter;
    if (n_iter % cfg.p_eval == 0) {
      const double d = discrepancy(model, out, set);
      trace.records.push_back({-1, n_iter, d});
      if (d > cfg.delta_max) {
        trace.exit_reason = "delta-exceeded";
        break;
      }
    }
  }
  trace.iterations = n_iter;
  finish_trace(trace, model, out, set);
  return {std::move(out), std::move(trace)};
}

std::pair<ReducedModel, RetrainTrace> retrain_fine(const ReducedModel& model,
                                                   const sim::EpisodeDataset& hist,
                                                   const RetrainConfig& cfg,
                                                   const StoppingSet& set) {
  require(cfg.algorithm == RetrainAlgo::fine, "retrain_fine: config declares another algorithm");
  check_inputs(model, hist, cfg, set);

  ReducedModel out = model;
  RetrainTrace trace;
  core::Rng g(core::derive_seed(cfg.seed, "retrain-fine"));
  core::EncDecNet grads = out.net.zeros_like();
  auto ws = core::make_workspace();
  std::vector<core::SeqSample> batch(cfg.batch);

  core::LrSchedule sched = cfg.schedule;
  sched.total = cfg.n_max;

  const int layers = out.net.head.layers();
  bool breached = false;
  for (int k = layers - 1; k >= 0 && !breached; --k) {
    const int depth = layers - 1 - k;
    const double layer_scale = std::pow(cfg.mu, depth);
    int n_iter = 0;
    while (true) {
      if (n_iter + 1 > cfg.n_max) break;
      fill_batch(batch, hist, out, g);
      grad_step_loss(out.net, batch, grads, *ws, n_iter);
      const double rate = core::lr_at(sched, n_iter) * layer_scale;
      core::ParamSpans p{std::span<double>(out.net.head.w[k].a),
                         std::span<double>(out.net.head.b[k])};
      core::GradSpans gs{std::span<const double>(grads.head.w[k].a),
                         std::span<const double>(grads.head.b[k])};
      core::sgd_update(p, gs, rate);
      ++n_iter;
      ++trace.iterations;
      if (n_iter % cfg.p_eval == 0) {
        const double d = discrepancy(model, out, set);
        trace.records.push_back({depth, n_iter, d});
        if (d > cfg.delta_max) {
          breached = true;
          break;
        }
      }
    }
  }
  trace.exit_reason = breached ? "delta-exceeded" : "iteration-cap";
  finish_trace(trace, model, out, set);
  return {std::move(out), std::move(trace)};
}

StoppingSet pendulum_stopping_set(const sim::EpisodeDataset& source, int n, int start,
                                  int length) {
  source.validate();
  require(n >= 1 && length >= 1 && start >= 0, "stopping set: bad window");
  require(start + n + length <= source.steps(), "stopping set: window exceeds the dataset");

  StoppingSet set;
  Mat env(length, source.d_ext());
  Mat cmd(length, source.d_cmd());
  for (int t = 0; t < length; ++t) {
    const int row = start + n + t;
    for (int j = 0; j < source.d_cmd(); ++j) cmd(t, j) = source.cmd(row, j);
    for (int j = 0; j < source.d_ext(); ++j) env(t, j) = source.ext(row, j);
  }
  Mat pre(n, source.d_total());
  for (int t = 0; t < n; ++t) {
    auto row = pre.row(t);
    source.fill_x(start + t, row);
  }
  set.env.push_back(std::move(env));
  set.cmd.push_back(std::move(cmd));
  set.prefix.push_back(std::move(pre));
  set.validate();
  return set;
}

namespace {

sim::BuildingCommand scenario_command(int scenario, int rooms) {
  sim::BuildingCommand c;
  c.valve.assign(rooms, 0.0);
  c.blind.assign(rooms, 0);
  c.c_r = 1.5;
  switch (scenario) {
    case 0:  // neutral supply, blinds open, coil off
      c.t_air = 20.0;
      break;
    case 1:  // neutral supply, blinds closed
      c.t_air = 20.0;
      c.blind.assign(rooms, 4);
      break;
    case 2:  // neutral water through open valves, blinds half
      c.t_air = 20.0;
      c.t_flow = 20.0;
      c.blind.assign(rooms, 2);
      c.valve.assign(rooms, 1.0);
      break;
    case 3:  // warm supply air plus hot water
      c.t_air = 26.0;
      c.t_flow = 50.0;
      c.blind.assign(rooms, 4);
      c.valve.assign(rooms, 1.0);
      break;
    default:  // cold supply air plus chilled water
      c.t_air = 10.0;
      c.t_flow = 10.0;
      c.blind.assign(rooms, 4);
      c.valve.assign(rooms, 1.0);
      break;
  }
  return c;
}

}  // namespace

StoppingSet building_stopping_set(const std::vector<sim::RoomSpec>& rooms, int n,
                                  uint64_t seed) {
  require(n >= 1, "stopping set: encode length must be >= 1");
  constexpr int kDay = 144;
  constexpr int kScenarios = 5;
  const sim::WeatherProfile profiles[] = {sim::WeatherProfile::cold_day,
                                          sim::WeatherProfile::hot_day,
                                          sim::WeatherProfile::cloudy_day};
  const char* labels[] = {"cold", "hot", "cloudy"};

  StoppingSet set;
  for (int pi = 0; pi < 3; ++pi) {
    const auto w = sim::gen_weather(profiles[pi], core::derive_seed(seed, labels[pi]), n + kDay);
    for (int ci = 0; ci < kScenarios; ++ci) {
      std::vector<sim::BuildingCommand> cmds(
          n + kDay, scenario_command(ci, static_cast<int>(rooms.size())));
      const auto ds = sim::rollout_building(rooms, sim::initial_state(rooms, 21.0), w, cmds);
      if (ci == 0) {
        Mat env(kDay, ds.d_ext());
        for (int t = 0; t < kDay; ++t)
          for (int j = 0; j < ds.d_ext(); ++j) env(t, j) = ds.ext(n + t, j);
        set.env.push_back(std::move(env));
      }
      if (pi == 0) {
        Mat cmd(kDay, ds.d_cmd());
        for (int t = 0; t < kDay; ++t)
          for (int j = 0; j < ds.d_cmd(); ++j) cmd(t, j) = ds.cmd(n + t, j);
        set.cmd.push_back(std::move(cmd));
      }
      Mat pre(n, ds.d_total());
      for (int t = 0; t < n; ++t) {
        auto row = pre.row(t);
        ds.fill_x(t, row);
      }
      set.prefix.push_back(std::move(pre));
    }
  }
  set.validate();
  return set;
}

}  // namespace rmc::sysid
