#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "rmc/core/encdec.hpp"
#include "rmc/sim/rollout.hpp"
#include "rmc/sim/signals.hpp"
#include "rmc/sysid/ensemble.hpp"
#include "rmc/sysid/linear_ssm.hpp"
#include "rmc/sysid/reduced_model.hpp"
#include "rmc/sysid/retrain.hpp"
#include "rmc/sysid/train.hpp"

using namespace rmc;
using namespace rmc::sysid;
using core::Mat;
using core::Rng;
using core::Vec;

namespace {

sim::EpisodeDataset pendulum_hist(int steps, uint64_t seed, sim::SignalShape shape) {
  Rng g(seed);
  sim::SignalSpec spec;
  spec.shape = shape;
  spec.amp_lo = 0.5;
  spec.amp_hi = 2.0;
  sim::PendulumConfig cfg;
  return sim::rollout_pendulum(cfg, sim::gen_signal(spec, steps, g), {0.3, 0.0});
}

ReducedModel tiny_pendulum_model(uint64_t seed, int hidden = 6, int n = 4, int l = 10) {
  Rng g(seed);
  return make_reduced_model(1, 0, 2, hidden, {8}, n, l, g);
}

bool nets_equal(const core::EncDecNet& a, const core::EncDecNet& b) {
  const auto sa = a.param_spans();
  const auto sb = b.param_spans();
  if (sa.size() != sb.size()) return false;
  for (size_t i = 0; i < sa.size(); ++i) {
    if (sa[i].size() != sb[i].size()) return false;
    for (size_t k = 0; k < sa[i].size(); ++k)
      if (sa[i][k] != sb[i][k]) return false;
  }
  return true;
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("normalizer centers and scales each channel") {
  sim::EpisodeDataset ds;
  ds.cmd = Mat(4, 1);
  ds.ext = Mat(4, 0);
  ds.obs = Mat(4, 1);
  ds.cmd_names = {"u"};
  ds.obs_names = {"y"};
  for (int t = 0; t < 4; ++t) {
    ds.cmd(t, 0) = t;        // mean 1.5, var 5/3
    ds.obs(t, 0) = 7.0;      // constant channel
  }
  const auto nz = Normalizer::fit(ds);
  CHECK(nz.mean[0] == doctest::Approx(1.5));
  CHECK(nz.scale[0] == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(nz.mean[1] == doctest::Approx(7.0));
  CHECK(nz.scale[1] == 1.0);  // degenerate channel passes through
  CHECK(nz.fwd(0, 1.5) == doctest::Approx(0.0));
  CHECK(nz.inv(0, nz.fwd(0, 3.3)) == doctest::Approx(3.3));

  const auto id = Normalizer::identity(3);
  CHECK(id.fwd(2, -4.25) == -4.25);
  CHECK(id.inv(1, 0.125) == 0.125);
}

TEST_CASE("encode matches manual recurrence and is pure") {
  auto m = tiny_pendulum_model(11, 5, 3, 6);
  Rng g(99);
  Mat window(3, m.d());
  for (size_t i = 0; i < window.size(); ++i) window.a[i] = core::uniform(g, -1.0, 1.0);

  core::LstmState s(m.net.enc.hidden);
  Vec zbuf(4 * m.net.enc.hidden);
  for (int t = 0; t < 3; ++t) core::lstm_step(m.net.enc, window.row(t), s, zbuf);

  const auto [c, h] = m.encode(window);
  for (int j = 0; j < m.net.enc.hidden; ++j) {
    CHECK(c[j] == s.c[j]);
    CHECK(h[j] == s.h[j]);
  }
  const auto [c2, h2] = m.encode(window);
  CHECK(c2 == c);
  CHECK(h2 == h);

  Mat wrong(2, m.d());
  CHECK_THROWS_AS((void)m.encode(wrong), core::ShapeError);
}

TEST_CASE("single-step encode and decode reduce to the primitives") {
  auto m = tiny_pendulum_model(12, 4, 1, 1);
  Rng g(5);
  Mat window(1, m.d());
  for (size_t i = 0; i < window.size(); ++i) window.a[i] = core::uniform(g, -1.0, 1.0);
  const auto [c, h] = m.encode(window);
  const auto [ce, he] = core::lstm_step(m.net.enc, window.row(0), Vec(4, 0.0), Vec(4, 0.0));
  CHECK(c == ce);
  CHECK(h == he);

  Mat in1(1, m.d_sharp());
  in1(0, 0) = 0.4;
  const auto [cd, hd] = core::lstm_step(m.net.dec, in1.row(0), c, h);
  const Vec o = core::mlp_forward(m.net.head, hd);
  const Mat dec = m.decode(c, h, in1);
  CHECK(dec(0, 0) == o[0]);
  CHECK(dec(0, 1) == o[1]);
}

TEST_CASE("decode sees commands only, never the withheld observations") {
  auto m = tiny_pendulum_model(13);
  auto ds = pendulum_hist(200, 21, sim::SignalShape::steps);
  m.norm = Normalizer::fit(ds);

  const Mat pred = m.predict_segment(ds, 10, 30);
  // Scrambling the observations after the encode window must change nothing.
  auto scrambled = ds;
  for (int t = 10 + m.n; t < scrambled.steps(); ++t)
    for (int j = 0; j < scrambled.d_obs(); ++j) scrambled.obs(t, j) = -9.0 + t + j;
  const Mat pred2 = m.predict_segment(scrambled, 10, 30);
  CHECK(pred.a == pred2.a);
  CHECK(pred.rows == 30);
  CHECK(pred.cols == 2);
}

TEST_CASE("make_sample normalizes the right slices") {
  auto ds = pendulum_hist(100, 3, sim::SignalShape::sinusoid);
  const auto nz = Normalizer::fit(ds);
  const auto s = make_sample(ds, nz, 17, 5, 8);
  REQUIRE(s.enc_x.rows == 5);
  REQUIRE(s.dec_x.rows == 8);
  REQUIRE(s.target.rows == 8);
  CHECK(s.enc_x.cols == 3);
  CHECK(s.dec_x.cols == 1);
  CHECK(s.target.cols == 2);
  CHECK(s.enc_x(2, 0) == nz.fwd(0, ds.cmd(19, 0)));
  CHECK(s.enc_x(2, 1) == nz.fwd(1, ds.obs(19, 0)));
  CHECK(s.dec_x(3, 0) == nz.fwd(0, ds.cmd(25, 0)));
  CHECK(s.target(3, 1) == nz.fwd(2, ds.obs(25, 1)));
  CHECK_THROWS_AS((void)make_sample(ds, nz, 90, 5, 8), core::ShapeError);
}

TEST_CASE("reduced model checkpoint round-trips bitwise") {
  auto m = tiny_pendulum_model(77, 7, 5, 9);
  auto ds = pendulum_hist(300, 4, sim::SignalShape::square);
  m.norm = Normalizer::fit(ds);
  const std::string path = tmp_path("rm_roundtrip.rmc");
  save_reduced_model(m, path);
  const auto r = load_reduced_model(path);
  CHECK(nets_equal(m.net, r.net));
  CHECK(r.norm.mean == m.norm.mean);
  CHECK(r.norm.scale == m.norm.scale);
  CHECK(r.d_cmd == 1);
  CHECK(r.d_ext == 0);
  CHECK(r.d_obs == 2);
  CHECK(r.n == 5);
  CHECK(r.l == 9);
  std::filesystem::remove(path);
}

TEST_CASE("stage-1 learns a constant-output system quickly") {
  // Constant observation: the head only needs to land on the right bias.
  sim::EpisodeDataset ds;
  ds.cmd = Mat(400, 1);
  ds.ext = Mat(400, 0);
  ds.obs = Mat(400, 1);
  ds.cmd_names = {"u"};
  ds.obs_names = {"y"};
  Rng g(8);
  for (int t = 0; t < 400; ++t) {
    ds.cmd(t, 0) = core::uniform(g, -1.0, 1.0);
    ds.obs(t, 0) = 2.5;
  }
  Rng mg(9);
  auto m = make_reduced_model(1, 0, 1, 4, {}, 3, 6, mg);
  TrainConfig cfg;
  cfg.iterations = 200;
  cfg.batch = 16;
  cfg.lr = 3e-3;
  cfg.seed = 10;
  const auto res = train_stage1(m, ds, cfg);
  CHECK(res.final_val_loss < 1e-3);
}

TEST_CASE("stage-1 is deterministic and lowers validation loss") {
  auto ds = pendulum_hist(2500, 31, sim::SignalShape::steps);
  TrainConfig cfg;
  cfg.iterations = 150;
  cfg.batch = 24;
  cfg.lr = 2e-3;
  cfg.log_every = 25;
  cfg.seed = 77;

  auto m1 = tiny_pendulum_model(55, 8, 6, 16);
  const auto r1 = train_stage1(m1, ds, cfg);
  auto m2 = tiny_pendulum_model(55, 8, 6, 16);
  const auto r2 = train_stage1(m2, ds, cfg);
  CHECK(nets_equal(m1.net, m2.net));
  CHECK(r1.final_val_loss == r2.final_val_loss);

  // Validation loss (normalized units) ends below the target variance of ~1
  // and below where it started.
  CHECK(r1.final_val_loss < 1.0);
  CHECK(r1.final_val_loss < r1.log.front().train_loss);
  // Log rows carry a validation value exactly on the cadence.
  CHECK(std::isnan(r1.log[0].val_loss));
  CHECK(!std::isnan(r1.log[24].val_loss));
}

TEST_CASE("stage-1 reports the iteration when training blows up") {
  auto ds = pendulum_hist(600, 32, sim::SignalShape::steps);
  auto m = tiny_pendulum_model(56);
  TrainConfig cfg;
  cfg.iterations = 50;
  cfg.batch = 8;
  // Saturating gates keep even absurd rates finite, so the rate has to be
  // large enough that a squared residual overflows outright.
  cfg.lr = 1e160;
  cfg.seed = 1;
  try {
    (void)train_stage1(m, ds, cfg);
    FAIL("expected NumericError");
  } catch (const core::NumericError& e) {
    CHECK(std::string(e.what()).find("stage-1 iteration") != std::string::npos);
  }
}

TEST_CASE("discrepancy: zero on itself, symmetric, exact on a shifted head bias") {
  auto ds = pendulum_hist(400, 41, sim::SignalShape::sinusoid);
  Rng g(42);
  // Single-layer head: decoded outputs are linear in the head bias.
  auto a = make_reduced_model(1, 0, 2, 6, {}, 4, 10, g);
  const auto set = pendulum_stopping_set(ds, a.n, 50, 100);

  CHECK(discrepancy(a, a, set) == 0.0);

  auto b = a;
  b.net.head.b[0][1] += 0.3;
  const double d_ab = discrepancy(a, b, set);
  const double d_ba = discrepancy(b, a, set);
  CHECK(d_ab == d_ba);
  // One of two channels shifted by 0.3 everywhere: mean |diff| = 0.15.
  CHECK(d_ab == doctest::Approx(0.15).epsilon(1e-9));

  auto c = tiny_pendulum_model(43, 6, 5, 10);  // different n
  CHECK_THROWS_AS((void)discrepancy(a, c, set), core::ShapeError);
}

TEST_CASE("retrain config validation") {
  RetrainConfig cfg;
  cfg.n_max = 100;
  cfg.p_eval = 10;
  CHECK_NOTHROW(cfg.validate());
  cfg.p_eval = 11;  // budget covers fewer than ten evaluations
  CHECK_THROWS_AS(cfg.validate(), core::ShapeError);
  cfg.p_eval = 10;
  cfg.delta_max = -0.1;
  CHECK_THROWS_AS(cfg.validate(), core::ShapeError);
  cfg.delta_max = 0.0;  // a zero bound is legal: it trips at the first probe
  CHECK_NOTHROW(cfg.validate());
  cfg.n_max = 0;  // no-op budget is legal too
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("retrain_full honors the cap and the drift bound") {
  auto ds = pendulum_hist(800, 51, sim::SignalShape::steps);
  auto m = tiny_pendulum_model(52);
  m.norm = Normalizer::fit(ds);
  const auto set = pendulum_stopping_set(ds, m.n, 100, 120);

  RetrainConfig cfg;
  cfg.algorithm = RetrainAlgo::full;
  cfg.seed = 5;

  SUBCASE("n_max = 0 returns the model untouched") {
    cfg.n_max = 0;
    cfg.p_eval = 1;
    const auto [out, trace] = retrain_full(m, ds, cfg, set);
    CHECK(nets_equal(out.net, m.net));
    CHECK(trace.iterations == 0);
    CHECK(trace.records.empty());
    CHECK(trace.exit_reason == "iteration-cap");
    CHECK(trace.final_delta == 0.0);
  }

  SUBCASE("a zero bound exits at the first probe") {
    cfg.n_max = 100;
    cfg.p_eval = 8;
    cfg.delta_max = 0.0;
    cfg.batch = 8;
    const auto [out, trace] = retrain_full(m, ds, cfg, set);
    CHECK(trace.exit_reason == "delta-exceeded");
    CHECK(trace.iterations == 8);
    REQUIRE(trace.records.size() == 1);
    CHECK(trace.records[0].delta > 0.0);
    CHECK(trace.records[0].layer == -1);
    CHECK(trace.final_delta == trace.records[0].delta);
  }

  SUBCASE("a generous bound runs to the cap with a full probe trail") {
    cfg.n_max = 40;
    cfg.p_eval = 4;
    cfg.delta_max = 1e9;
    cfg.batch = 4;
    const auto [out, trace] = retrain_full(m, ds, cfg, set);
    CHECK(trace.exit_reason == "iteration-cap");
    CHECK(trace.iterations == 40);
    REQUIRE(trace.records.size() == 10);
    for (size_t i = 0; i < trace.records.size(); ++i)
      CHECK(trace.records[i].iteration == static_cast<int>(4 * (i + 1)));
    CHECK(!nets_equal(out.net, m.net));
  }

  SUBCASE("history shorter than one window is rejected") {
    auto tiny = pendulum_hist(10, 5, sim::SignalShape::steps);
    cfg.n_max = 10;
    cfg.p_eval = 1;
    CHECK_THROWS_AS((void)retrain_full(m, tiny, cfg, set), std::domain_error);
  }
}

TEST_CASE("retrain_fine trains the head only, output layer first") {
  auto ds = pendulum_hist(900, 61, sim::SignalShape::square);
  auto m = tiny_pendulum_model(62);  // head {8}: two layers
  m.norm = Normalizer::fit(ds);
  const auto set = pendulum_stopping_set(ds, m.n, 80, 150);

  RetrainConfig cfg;
  cfg.algorithm = RetrainAlgo::fine;
  cfg.n_max = 30;
  cfg.p_eval = 3;
  cfg.batch = 6;
  cfg.delta_max = 1e9;
  cfg.schedule.kind = core::LrSchedule::Kind::slanted_triangular;
  cfg.schedule.eta_max = 0.05;
  cfg.seed = 63;

  const auto [out, trace] = retrain_fine(m, ds, cfg, set);
  CHECK(out.net.enc.w.a == m.net.enc.w.a);
  CHECK(out.net.enc.b == m.net.enc.b);
  CHECK(out.net.dec.w.a == m.net.dec.w.a);
  CHECK(out.net.dec.b == m.net.dec.b);
  CHECK(out.net.head.w[0].a != m.net.head.w[0].a);
  CHECK(out.net.head.w[1].a != m.net.head.w[1].a);
  CHECK(trace.exit_reason == "iteration-cap");
  CHECK(trace.iterations == 60);  // both layers exhaust their budget
  // Output layer (depth 0) probes come before the inner layer's.
  REQUIRE(trace.records.size() == 20);
  for (int i = 0; i < 10; ++i) {
    CHECK(trace.records[i].layer == 0);
    CHECK(trace.records[10 + i].layer == 1);
  }
}

TEST_CASE("retrain_fine with a one-layer head matches a hand SGD loop") {
  auto ds = pendulum_hist(700, 71, sim::SignalShape::steps);
  Rng g(72);
  auto m = make_reduced_model(1, 0, 2, 6, {}, 4, 10, g);
  m.norm = Normalizer::fit(ds);
  const auto set = pendulum_stopping_set(ds, m.n, 60, 100);

  RetrainConfig cfg;
  cfg.algorithm = RetrainAlgo::fine;
  cfg.n_max = 10;
  cfg.p_eval = 1;
  cfg.batch = 5;
  cfg.delta_max = 1e9;
  cfg.schedule.kind = core::LrSchedule::Kind::slanted_triangular;
  cfg.schedule.eta_max = 0.02;
  cfg.seed = 73;

  const auto [out, trace] = retrain_fine(m, ds, cfg, set);

  // Replay: same seed stream, same batches, SGD on the head at the raw
  // schedule rate (depth 0, so no per-layer decay applies).
  auto ref = m;
  Rng rg(core::derive_seed(cfg.seed, "retrain-fine"));
  auto grads = ref.net.zeros_like();
  auto ws = core::make_workspace();
  core::LrSchedule sched = cfg.schedule;
  sched.total = cfg.n_max;
  const int last_start = ds.steps() - (ref.n + ref.l);
  std::vector<core::SeqSample> batch(cfg.batch);
  for (int it = 0; it < cfg.n_max; ++it) {
    for (auto& s : batch)
      s = make_sample(ds, ref.norm, core::uniform_int(rg, 0, last_start), ref.n, ref.l);
    (void)core::batch_gradients(ref.net, batch, core::LossKind::squared, grads, *ws);
    core::ParamSpans p{std::span<double>(ref.net.head.w[0].a),
                       std::span<double>(ref.net.head.b[0])};
    core::GradSpans gs{std::span<const double>(grads.head.w[0].a),
                       std::span<const double>(grads.head.b[0])};
    core::sgd_update(p, gs, core::lr_at(sched, it));
  }
  CHECK(out.net.head.w[0].a == ref.net.head.w[0].a);
  CHECK(out.net.head.b[0] == ref.net.head.b[0]);
  CHECK(trace.iterations == 10);
}

TEST_CASE("stopping contract holds over randomized retrain configs") {
  auto ds = pendulum_hist(600, 81, sim::SignalShape::steps);
  auto m = tiny_pendulum_model(82, 4, 3, 8);
  m.norm = Normalizer::fit(ds);
  const auto set = pendulum_stopping_set(ds, m.n, 40, 80);

  Rng g(83);
  for (int trial = 0; trial < 6; ++trial) {
    RetrainConfig cfg;
    cfg.algorithm = trial % 2 == 0 ? RetrainAlgo::full : RetrainAlgo::fine;
    cfg.p_eval = core::uniform_int(g, 1, 3);
    cfg.n_max = 10 * cfg.p_eval * core::uniform_int(g, 1, 2);
    cfg.batch = core::uniform_int(g, 2, 6);
    cfg.delta_max = std::exp(core::uniform(g, std::log(1e-4), std::log(0.5)));
    cfg.lr = 5e-3;  // move fast so small bounds actually trip
    cfg.schedule.kind = core::LrSchedule::Kind::slanted_triangular;
    cfg.schedule.eta_max = 0.05;
    cfg.seed = 1000 + trial;
    CAPTURE(trial);

    const auto [out, trace] = cfg.algorithm == RetrainAlgo::full
                                  ? retrain_full(m, ds, cfg, set)
                                  : retrain_fine(m, ds, cfg, set);
    const bool breached = trace.exit_reason == "delta-exceeded";
    CHECK((breached || trace.exit_reason == "iteration-cap"));
    for (size_t i = 0; i < trace.records.size(); ++i) {
      CHECK(trace.records[i].iteration % cfg.p_eval == 0);
      const bool last = i + 1 == trace.records.size();
      if (!last || !breached) CHECK(trace.records[i].delta <= cfg.delta_max);
    }
    if (breached) {
      REQUIRE(!trace.records.empty());
      CHECK(trace.records.back().delta > cfg.delta_max);
      CHECK(trace.final_delta == trace.records.back().delta);
    } else {
      const int phases = cfg.algorithm == RetrainAlgo::fine ? m.net.head.layers() : 1;
      CHECK(trace.iterations == phases * cfg.n_max);
    }
    if (cfg.algorithm == RetrainAlgo::fine) {
      CHECK(out.net.enc.w.a == m.net.enc.w.a);
      CHECK(out.net.dec.w.a == m.net.dec.w.a);
    }
  }
}

TEST_CASE("building stopping set crosses day profiles with scenarios") {
  const auto rooms = sim::mini_building();
  const auto set = building_stopping_set(rooms, 12, 7);
  CHECK(set.env.size() == 3);
  CHECK(set.cmd.size() == 5);
  CHECK(set.pairs() == 15);
  CHECK(set.prefix.size() == 15);
  CHECK(set.env[0].rows == 144);
  CHECK(set.env[0].cols == 2);
  CHECK(set.cmd[0].rows == 144);
  CHECK(set.cmd[0].cols == 19);
  CHECK(set.prefix[0].rows == 12);
  CHECK(set.prefix[0].cols == 29);

  // Scenario columns: first is all-open blinds and closed valves, the last
  // runs chilled water with closed blinds.
  CHECK(set.cmd[0](50, 0) == 0.0);   // valve room 0
  CHECK(set.cmd[0](50, 8) == 0.0);   // blind room 0
  CHECK(set.cmd[4](50, 0) == 1.0);
  CHECK(set.cmd[4](50, 8) == 4.0);
  CHECK(set.cmd[4](50, 16) == 10.0);  // t_flow
  CHECK(set.cmd[4](50, 17) == 10.0);  // t_air
  // Prefixes differ across pairs (they embed simulated observations).
  CHECK(set.prefix[0].a != set.prefix[5].a);
  // The composed decoder input stitches the scenario commands to the day.
  const Mat xs = set.x_sharp(1, 2);
  CHECK(xs.rows == 144);
  CHECK(xs.cols == 21);
  CHECK(xs(10, 0) == set.cmd[2](10, 0));
  CHECK(xs(10, 19) == set.env[1](10, 0));
}

TEST_CASE("fine retraining drifts less than full retraining on building data") {
  // Mirrors the observed pattern: after adapting to altered dynamics, the
  // conservative layer-wise pass stays near the parent while the all-weights
  // pass crosses the same drift bound well before its larger budget.
  const auto rooms = sim::mini_building();
  const auto weather = sim::gen_weather(sim::WeatherProfile::seasonal_year, 90, 3 * 144);
  Rng cg(91);
  std::vector<sim::BuildingCommand> cmds;
  sim::BuildingCommand c;
  const int n_rooms = static_cast<int>(rooms.size());
  c.valve.assign(n_rooms, 0.0);
  c.blind.assign(n_rooms, 0);
  for (int t = 0; t < 3 * 144; ++t) {
    if (t % 36 == 0) {
      for (int r = 0; r < n_rooms; ++r) {
        c.valve[r] = core::uniform(cg, 0.0, 1.0);
        c.blind[r] = core::uniform_int(cg, 0, 4);
      }
      c.t_flow = core::uniform(cg, 10.0, 50.0);
      c.t_air = core::uniform(cg, 12.0, 28.0);
      c.c_r = core::uniform(cg, 0.5, 2.5);
    }
    cmds.push_back(c);
  }
  const auto hist = sim::rollout_building(rooms, sim::initial_state(rooms, 21.0), weather, cmds);

  Rng mg(92);
  auto m = make_reduced_model(19, 2, 8, 16, {16}, 12, 24, mg);
  TrainConfig pre;
  pre.iterations = 200;
  pre.batch = 8;
  pre.lr = 1e-3;
  pre.val_windows = 2;
  pre.seed = 95;
  (void)train_stage1(m, hist, pre);
  const auto set = building_stopping_set(rooms, m.n, 93);

  RetrainConfig full;
  full.algorithm = RetrainAlgo::full;
  full.delta_max = 0.1;
  full.n_max = 1500;
  full.p_eval = 50;
  full.batch = 8;
  full.lr = 1e-3;
  full.seed = 94;
  const auto [mf, tf] = retrain_full(m, hist, full, set);

  RetrainConfig fine = full;
  fine.algorithm = RetrainAlgo::fine;
  fine.n_max = 200;
  fine.p_eval = 20;
  fine.schedule.kind = core::LrSchedule::Kind::slanted_triangular;
  fine.schedule.eta_max = 0.004;
  const auto [mn, tn] = retrain_fine(m, hist, fine, set);

  CAPTURE(tf.final_delta);
  CAPTURE(tn.final_delta);
  CAPTURE(tf.iterations);
  CAPTURE(tn.iterations);
  CHECK(tf.exit_reason == "delta-exceeded");
  CHECK(tn.exit_reason == "iteration-cap");
  CHECK(tn.final_delta <= fine.delta_max);
  CHECK(tn.final_delta <= tf.final_delta);
  CHECK(mn.net.enc.w.a == m.net.enc.w.a);
}

TEST_CASE("ensemble builds, partitions, and reloads") {
  auto ds = pendulum_hist(700, 101, sim::SignalShape::steps);
  auto m = tiny_pendulum_model(102, 4, 3, 8);
  m.norm = Normalizer::fit(ds);
  const auto set = pendulum_stopping_set(ds, m.n, 30, 60);

  EnsembleSpec spec;
  spec.held_out = 1;
  for (int i = 0; i < 3; ++i) {
    RetrainConfig cfg;
    cfg.algorithm = i % 2 == 0 ? RetrainAlgo::full : RetrainAlgo::fine;
    cfg.n_max = 20;
    cfg.p_eval = 2;
    cfg.batch = 4;
    cfg.delta_max = 0.5 + 0.1 * i;
    cfg.schedule.kind = core::LrSchedule::Kind::slanted_triangular;
    cfg.schedule.eta_max = 0.02;
    cfg.seed = 200 + i;
    spec.configs.push_back(cfg);
  }

  const std::string dir = tmp_path("ens_test");
  std::filesystem::remove_all(dir);
  const auto e = build_ensemble(m, ds, spec, set, dir);
  REQUIRE(e.members.size() == 3);
  CHECK(e.training_ids() == std::vector<int>{0, 1});
  CHECK(e.held_out_ids() == std::vector<int>{2});
  CHECK(e.members[0].role == "training");
  CHECK(e.members[2].role == "held-out");
  CHECK(e.members[1].algorithm == RetrainAlgo::fine);
  for (const auto& mem : e.members) {
    CHECK(!mem.exit_reason.empty());
    CHECK(std::filesystem::exists(std::filesystem::path(dir) / mem.checkpoint));
  }

  const auto r = load_ensemble((std::filesystem::path(dir) / "ensemble.json").string());
  REQUIRE(r.members.size() == 3);
  CHECK(r.held_out == 1);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(nets_equal(r.members[i].model.net, e.members[i].model.net));
    CHECK(r.members[i].id == e.members[i].id);
    CHECK(r.members[i].final_delta == e.members[i].final_delta);
  }
  std::filesystem::remove_all(dir);

  // A member whose window cannot fit the history fails loudly, by name.
  auto bad = spec;
  bad.configs[1].batch = 1;
  auto short_ds = pendulum_hist(10, 5, sim::SignalShape::steps);
  try {
    (void)build_ensemble(m, short_ds, bad, set, dir);
    FAIL("expected EnsembleError");
  } catch (const EnsembleError& err) {
    CHECK(std::string(err.what()).find("m00") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

namespace {

// Simulates x(t+1) = A x + B u, y = C x + D u for the oracle tests.
Mat simulate_linear(const Mat& A, const Mat& B, const Mat& C, const Mat& D, const Mat& u) {
  const int nx = A.rows, p = C.rows;
  Vec x(nx, 0.0), xn(nx);
  Mat y(u.rows, p);
  for (int t = 0; t < u.rows; ++t) {
    for (int i = 0; i < p; ++i) {
      double acc = 0.0;
      for (int j = 0; j < nx; ++j) acc += C(i, j) * x[j];
      for (int j = 0; j < u.cols; ++j) acc += D(i, j) * u(t, j);
      y(t, i) = acc;
    }
    for (int i = 0; i < nx; ++i) {
      double acc = 0.0;
      for (int j = 0; j < nx; ++j) acc += A(i, j) * x[j];
      for (int j = 0; j < u.cols; ++j) acc += B(i, j) * u(t, j);
      xn[i] = acc;
    }
    x = xn;
  }
  return y;
}

sim::EpisodeDataset wrap_io(const Mat& u, const Mat& y) {
  sim::EpisodeDataset ds;
  ds.cmd = u;
  ds.ext = Mat(u.rows, 0);
  ds.obs = y;
  for (int j = 0; j < u.cols; ++j) ds.cmd_names.push_back("u" + std::to_string(j));
  for (int j = 0; j < y.cols; ++j) ds.obs_names.push_back("y" + std::to_string(j));
  return ds;
}

}  // namespace

TEST_CASE("subspace identification recovers a known order-2 system") {
  Mat A(2, 2), B(2, 1), C(1, 2), D(1, 1);
  A(0, 0) = 0.8;  A(0, 1) = 0.2;
  A(1, 0) = -0.3; A(1, 1) = 0.7;
  B(0, 0) = 1.0;  B(1, 0) = 0.5;
  C(0, 0) = 1.0;  C(0, 1) = -0.4;
  D(0, 0) = 0.2;
  Rng g(111);
  Mat u(2000, 1);
  for (int t = 0; t < 2000; ++t) u(t, 0) = core::uniform(g, -1.0, 1.0);
  const Mat y = simulate_linear(A, B, C, D, u);
  const auto ds = wrap_io(u, y);

  const auto m = fit_linear_ssm(ds, 2);
  CHECK(m.stable);
  CHECK(m.spectral_radius == doctest::Approx(std::sqrt(0.8 * 0.7 + 0.3 * 0.2)).epsilon(1e-4));

  Mat y_warm(50, 1);
  for (int t = 0; t < 50; ++t) y_warm(t, 0) = y(t, 0);
  const Mat pred = predict_linear_ssm(m, u, y_warm);
  double worst = 0.0;
  for (int t = 0; t < pred.rows; ++t)
    worst = std::max(worst, std::fabs(pred(t, 0) - y(t + 50, 0)));
  CHECK(worst < 1e-6);
}

TEST_CASE("subspace identification fits every order on pendulum data") {
  const auto ds = pendulum_hist(3000, 121, sim::SignalShape::sinusoid);
  for (int order = 2; order <= 10; ++order) {
    const auto m = fit_linear_ssm(ds, order);
    CHECK(m.order == order);
    CHECK(m.A.rows == order);
    CHECK(m.B.cols == 1);
    CHECK(m.C.rows == 2);
    CHECK(std::isfinite(m.spectral_radius));
  }
  CHECK_THROWS_AS((void)fit_linear_ssm(ds, 0), core::ShapeError);
  CHECK_THROWS_AS((void)fit_linear_ssm(ds, 11), core::ShapeError);
  auto tiny = pendulum_hist(20, 5, sim::SignalShape::steps);
  CHECK_THROWS_AS((void)fit_linear_ssm(tiny, 3), IdentificationError);
}

TEST_CASE("zero data yields a zero-response model") {
  Mat u(500, 1), y(500, 1);
  const auto m = fit_linear_ssm(wrap_io(u, y), 3);
  CHECK(m.stable);
  Mat y_warm(20, 1);
  Mat probe(500, 1);
  for (int t = 0; t < 500; ++t) probe(t, 0) = 0.0;
  const Mat pred = predict_linear_ssm(m, probe, y_warm);
  for (int t = 0; t < pred.rows; ++t) CHECK(std::fabs(pred(t, 0)) < 1e-9);
}

TEST_CASE("free-run divergence is reported") {
  LinearSSM m;
  m.order = 1;
  m.d_in = 1;
  m.d_out = 1;
  m.A = Mat(1, 1);
  m.A(0, 0) = 1.5;
  m.B = Mat(1, 1);
  m.B(0, 0) = 1.0;
  m.C = Mat(1, 1);
  m.C(0, 0) = 1.0;
  m.D = Mat(1, 1);
  m.spectral_radius = 1.5;
  Mat u(200, 1);
  for (int t = 0; t < 200; ++t) u(t, 0) = 1.0;
  Mat y_warm(5, 1);
  for (int t = 0; t < 5; ++t) y_warm(t, 0) = std::pow(1.5, t);
  CHECK_THROWS_AS((void)predict_linear_ssm(m, u, y_warm), DivergenceError);
}
