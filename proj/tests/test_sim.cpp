#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "rmc/sim/building.hpp"
#include "rmc/sim/dataset.hpp"
#include "rmc/sim/pendulum.hpp"
#include "rmc/sim/rollout.hpp"
#include "rmc/sim/signals.hpp"
#include "rmc/sim/weather.hpp"

using namespace rmc::sim;
using rmc::core::Rng;

namespace {

double pendulum_energy(const PendulumConfig& cfg, const PendulumState& s) {
  return 0.5 * s.omega * s.omega - (cfg.g / cfg.l) * std::cos(s.theta);
}

}  // namespace

TEST_CASE("pendulum equilibrium stays put") {
  PendulumConfig cfg;
  PendulumState s{0.0, 0.0};
  s = pendulum_step(cfg, s, 0.0);
  CHECK(s.theta == 0.0);
  CHECK(s.omega == 0.0);
}

TEST_CASE("unforced pendulum conserves energy") {
  PendulumConfig cfg;
  cfg.dt = 0.01;
  PendulumState s{2.0, 0.0};
  const double e0 = pendulum_energy(cfg, s);
  for (int t = 0; t < 1000; ++t) s = pendulum_step(cfg, s, 0.0);
  const double e1 = pendulum_energy(cfg, s);
  CHECK(std::fabs(e1 - e0) / std::fabs(e0) < 1e-6);
}

TEST_CASE("linearized pendulum matches the forced oscillator closed form") {
  PendulumConfig cfg;
  cfg.linearized = true;
  cfg.l = 1.2;
  cfg.m = 1.5;
  cfg.dt = 0.01;
  const double torque = 0.7;
  const double w0 = std::sqrt(cfg.g / cfg.l);
  const double u = torque / (cfg.m * cfg.l * cfg.l);
  const double theta_p = -u / (w0 * w0);

  PendulumState s{0.3, -0.2};
  const double a = s.theta - theta_p;
  const double b = s.omega / w0;
  for (int t = 1; t <= 100; ++t) {
    s = pendulum_step(cfg, s, torque);
    const double tt = t * cfg.dt;
    const double exact = theta_p + a * std::cos(w0 * tt) + b * std::sin(w0 * tt);
    CHECK(std::fabs(s.theta - exact) < 1e-5);
  }
}

TEST_CASE("linearized tracks nonlinear for small angles") {
  PendulumConfig nl, lin;
  nl.dt = lin.dt = 0.01;
  lin.linearized = true;
  PendulumState a{0.01, 0.0}, b{0.01, 0.0};
  for (int t = 0; t < 100; ++t) {
    a = pendulum_step(nl, a, 0.0);
    b = pendulum_step(lin, b, 0.0);
    CHECK(std::fabs(a.theta - b.theta) < 1e-3);
  }
}

TEST_CASE("pendulum observation lives on the unit circle") {
  double x, y;
  observe_pendulum({0.0, 0.0}, x, y);
  CHECK(x == doctest::Approx(0.0));
  CHECK(y == doctest::Approx(1.0));
  observe_pendulum({M_PI / 2.0, 0.0}, x, y);
  CHECK(x == doctest::Approx(1.0));
  CHECK(y == doctest::Approx(0.0).epsilon(1e-12));
  Rng g(5);
  for (int k = 0; k < 100; ++k) {
    observe_pendulum({rmc::core::uniform(g, -10.0, 10.0), 0.0}, x, y);
    CHECK(std::fabs(x * x + y * y - 1.0) < 1e-12);
  }
}

TEST_CASE("signal generator shapes and determinism") {
  SignalSpec sine;
  sine.shape = SignalShape::sinusoid;
  sine.amp_lo = sine.amp_hi = 2.0;
  sine.period_lo = 80;
  sine.period_hi = 160;
  Rng g1(9), g2(9);
  auto a = gen_signal(sine, 4000, g1);
  auto b = gen_signal(sine, 4000, g2);
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  double peak = 0.0;
  for (double v : a) peak = std::max(peak, std::fabs(v));
  CHECK(peak <= 2.0);
  CHECK(peak > 2.0 * 0.995);  // a full cycle always comes close to its amplitude

  SignalSpec steps;
  steps.shape = SignalShape::steps;
  steps.amp_lo = -2.0;
  steps.amp_hi = 2.0;
  steps.period_lo = 10;
  steps.period_hi = 30;
  Rng g3(11);
  auto c = gen_signal(steps, 20000, g3);
  int changes = 0;
  for (size_t t = 1; t < c.size(); ++t) {
    CHECK(c[t] >= -2.0);
    CHECK(c[t] <= 2.0);
    if (c[t] != c[t - 1]) ++changes;
  }
  // mean hold is 20 steps, so about 1000 level changes
  CHECK(changes > 700);
  CHECK(changes < 1300);

  SignalSpec sq;
  sq.shape = SignalShape::square;
  sq.amp_lo = 0.5;
  sq.amp_hi = 2.0;
  Rng g4(13);
  auto d = gen_signal(sq, 5000, g4);
  for (double v : d) CHECK(std::fabs(v) <= 2.0);
}

TEST_CASE("weather profiles are ordered, seeded and dark at night") {
  auto hot = gen_weather(WeatherProfile::hot_day, 3, 288);
  auto cold = gen_weather(WeatherProfile::cold_day, 3, 288);
  auto cloudy = gen_weather(WeatherProfile::cloudy_day, 3, 288);
  auto again = gen_weather(WeatherProfile::hot_day, 3, 288);

  double hot_max = -1e9, cold_max = -1e9;
  for (double v : hot.t_out) hot_max = std::max(hot_max, v);
  for (double v : cold.t_out) cold_max = std::max(cold_max, v);
  CHECK(hot_max > cold_max);
  CHECK(std::memcmp(hot.t_out.data(), again.t_out.data(), hot.t_out.size() * sizeof(double)) ==
        0);
  for (double v : cloudy.t_out) {
    CHECK(v >= 15.0);
    CHECK(v <= 20.0);
  }
  for (int t = 0; t < 288; ++t) {
    const double hour = step_hour(hot, t);
    if (hour < 6.0 || hour > 18.0) CHECK(hot.irr[t] == 0.0);
    CHECK(hot.irr[t] >= 0.0);
  }
  auto year = gen_weather(WeatherProfile::seasonal_year, 7, 365 * 144);
  double winter = 0.0, summer = 0.0;
  for (int t = 0; t < 144 * 30; ++t) winter += year.t_out[t];
  for (int t = 144 * 170; t < 144 * 200; ++t) summer += year.t_out[t];
  CHECK(summer / (144 * 30) > winter / (144 * 30) + 10.0);
}

TEST_CASE("effective supply temperature") {
  CHECK(t_eff(20.0, 1.0, 0.6, 50.0, 1.0) == doctest::Approx(31.25).epsilon(1e-15));
  CHECK(t_eff(22.0, 1.3, 0.6, 45.0, 0.0) == 22.0);  // closed valve passes air through
  CHECK_THROWS_AS(t_eff(20.0, 0.0, 0.6, 50.0, 0.0), std::domain_error);

  // Convex combination: always between the two source temperatures.
  Rng g(17);
  for (int k = 0; k < 200; ++k) {
    const double ta = rmc::core::uniform(g, 5.0, 35.0);
    const double tf = rmc::core::uniform(g, 5.0, 60.0);
    const double cr = rmc::core::uniform(g, 0.2, 3.0);
    const double o = rmc::core::uniform(g, 0.0, 1.0);
    const double te = t_eff(ta, cr, 0.6, tf, o);
    CHECK(te >= std::min(ta, tf) - 1e-12);
    CHECK(te <= std::max(ta, tf) + 1e-12);
  }
}

TEST_CASE("building fixed point and convergence") {
  auto rooms = mini_building();
  const double c = 19.0;
  BuildingState s = initial_state(rooms, c);
  s.cmd.t_flow = c;
  s.cmd.t_air = c;
  s.cmd.c_r = 1.0;
  WeatherSample w{c, 0.0, 12.0};
  BuildingState next = building_step(rooms, s, w, 600.0);
  for (size_t i = 0; i < rooms.size(); ++i) {
    CHECK(next.t_room[i] == doctest::Approx(c).epsilon(1e-13));
    CHECK(next.t_wall[i] == doctest::Approx(c).epsilon(1e-13));
  }

  BuildingState far = initial_state(rooms, 30.0);
  far.cmd = s.cmd;
  far.cmd.valve.assign(rooms.size(), 0.5);
  for (int t = 0; t < 144 * 30; ++t) far = building_step(rooms, far, w, 600.0);
  for (size_t i = 0; i < rooms.size(); ++i) CHECK(std::fabs(far.t_room[i] - c) < 0.05);
}

TEST_CASE("solar gain responds to blinds and orientation") {
  auto rooms = mini_building();
  WeatherSample noon{15.0, 700.0, 12.5};
  BuildingState open = initial_state(rooms, 21.0);
  open.cmd.t_flow = 21.0;
  open.cmd.t_air = 21.0;
  BuildingState closed = open;
  closed.cmd.blind.assign(rooms.size(), 4);
  auto a = building_step(rooms, open, noon, 600.0);
  auto b = building_step(rooms, closed, noon, 600.0);
  for (size_t i = 0; i < rooms.size(); ++i) CHECK(a.t_room[i] > b.t_room[i]);

  // With blinds fully closed the sun contributes nothing at all.
  WeatherSample night{15.0, 0.0, 23.0};
  auto d = building_step(rooms, closed, night, 600.0);
  for (size_t i = 0; i < rooms.size(); ++i)
    CHECK(b.t_room[i] == doctest::Approx(d.t_room[i]).epsilon(1e-12));

  CHECK(orientation_factor(1, 9.0) == doctest::Approx(1.0));
  CHECK(orientation_factor(2, 12.5) == doctest::Approx(1.0));
  CHECK(orientation_factor(3, 16.0) == doctest::Approx(1.0));
  CHECK(orientation_factor(1, 16.0) < 0.01);
  CHECK(orientation_factor(0, 12.0) == doctest::Approx(0.25));
}

TEST_CASE("changeover demand dead band and thermostat valves") {
  Vec temps{23.0, 23.0, 23.0};
  CHECK(changeover_demand(temps, 23.0) == 0.0);
  temps = {23.4, 22.9, 23.0};  // inside the band on both sides
  CHECK(changeover_demand(temps, 23.0) == 0.0);
  temps = {24.0, 22.0, 23.0};
  CHECK(changeover_demand(temps, 23.0) == doctest::Approx(0.0));  // +1 and -1 cancel
  temps = {25.0, 23.0, 23.0};
  CHECK(changeover_demand(temps, 23.0) == doctest::Approx(2.0));

  Vec hot{24.5, 23.0, 26.0};
  auto cool_valves = thermostat_valves(hot, 23.0, true);
  CHECK(cool_valves[0] == doctest::Approx(1.0));
  CHECK(cool_valves[1] == 0.0);
  CHECK(cool_valves[2] == 1.0);
  auto heat_valves = thermostat_valves(Vec{21.5, 23.5}, 23.0, false);
  CHECK(heat_valves[0] == doctest::Approx(1.0));
  CHECK(heat_valves[1] == 0.0);
}

TEST_CASE("dataset round trip is bit exact") {
  namespace fs = std::filesystem;
  PendulumConfig cfg;
  Rng g(23);
  SignalSpec spec;
  spec.period_lo = 5;
  spec.period_hi = 20;
  auto torque = gen_signal(spec, 400, g);
  auto ds = rollout_pendulum(cfg, torque, {0.1, 0.0});
  ds.seed = 23;
  ds.generator = "test";

  const std::string path = (fs::temp_directory_path() / "rmc_ds_test.csv").string();
  save_dataset(ds, path);
  auto back = load_dataset(path);
  CHECK(back.dt == ds.dt);
  CHECK(back.seed == ds.seed);
  CHECK(back.cmd_names == ds.cmd_names);
  CHECK(std::memcmp(back.cmd.a.data(), ds.cmd.a.data(), ds.cmd.a.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(back.obs.a.data(), ds.obs.a.data(), ds.obs.a.size() * sizeof(double)) == 0);

  Vec x(ds.d_total());
  ds.fill_x(7, x);
  CHECK(x[0] == ds.cmd(7, 0));
  CHECK(x[1] == ds.obs(7, 0));
  CHECK(x[2] == ds.obs(7, 1));
  Vec xs(ds.d_sharp());
  ds.fill_x_sharp(7, xs);
  CHECK(xs[0] == ds.cmd(7, 0));
  fs::remove(path);
  fs::remove(path + ".meta.json");
}

TEST_CASE("building rollout aligns commands, weather and responses") {
  auto rooms = mini_building();
  auto w = gen_weather(WeatherProfile::cloudy_day, 31, 288);
  std::vector<BuildingCommand> cmds(200);
  Rng g(37);
  for (auto& c : cmds) {
    c.valve.assign(rooms.size(), 0.3);
    c.blind.assign(rooms.size(), 1);
    c.t_flow = rmc::core::uniform(g, 10.0, 50.0);
    c.t_air = 20.0;
    c.c_r = 1.5;
  }
  BuildingState s0 = initial_state(rooms, 21.0);
  auto ds = rollout_building(rooms, s0, w, cmds);
  CHECK(ds.steps() == 200);
  CHECK(ds.d_cmd() == 19);
  CHECK(ds.d_ext() == 2);
  CHECK(ds.d_obs() == 8);
  CHECK(ds.ext(0, 0) == w.t_out[0]);
  CHECK(ds.cmd(5, 16) == cmds[5].t_flow);

  std::vector<BuildingCommand> too_many(300);
  CHECK_THROWS(rollout_building(rooms, s0, gen_weather(WeatherProfile::cold_day, 1, 100),
                                too_many));
}
