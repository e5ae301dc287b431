#include "rmc/sim/rollout.hpp"

namespace rmc::sim {

using core::require;

EpisodeDataset rollout_pendulum(const PendulumConfig& cfg, const Vec& torque, PendulumState s0) {
  require(!torque.empty(), "rollout_pendulum: empty command series");
  const int n = static_cast<int>(torque.size());
  EpisodeDataset ds;
  ds.dt = cfg.dt;
  ds.cmd = Mat(n, 1);
  ds.ext = Mat(n, 0);
  ds.obs = Mat(n, 2);
  ds.cmd_names = {"torque"};
  ds.obs_names = {"x", "y"};
  PendulumState s = s0;
  for (int t = 0; t < n; ++t) {
    ds.cmd(t, 0) = torque[t];
    s = pendulum_step(cfg, s, torque[t]);
    observe_pendulum(s, ds.obs(t, 0), ds.obs(t, 1));
  }
  return ds;
}

EpisodeDataset rollout_building(const std::vector<RoomSpec>& rooms, BuildingState s0,
                                const WeatherSeries& w,
                                const std::vector<BuildingCommand>& cmds) {
  require(!cmds.empty(), "rollout_building: empty command series");
  require(cmds.size() <= w.t_out.size(), "rollout_building: commands outnumber weather steps");
  const int n = static_cast<int>(cmds.size());
  const int nr = static_cast<int>(rooms.size());

  EpisodeDataset ds;
  ds.dt = w.dt;
  ds.cmd = Mat(n, 2 * nr + 3);
  ds.ext = Mat(n, 2);
  ds.obs = Mat(n, nr);
  for (int i = 0; i < nr; ++i) ds.cmd_names.push_back("valve" + std::to_string(i));
  for (int i = 0; i < nr; ++i) ds.cmd_names.push_back("blind" + std::to_string(i));
  ds.cmd_names.insert(ds.cmd_names.end(), {"t_flow", "t_air", "c_r"});
  ds.ext_names = {"t_out", "irr"};
  for (int i = 0; i < nr; ++i) ds.obs_names.push_back("t_room" + std::to_string(i));

  BuildingState s = s0;
  for (int t = 0; t < n; ++t) {
    s.cmd = cmds[t];
    WeatherSample sample{w.t_out[t], w.irr[t], step_hour(w, t)};
    for (int i = 0; i < nr; ++i) {
      ds.cmd(t, i) = s.cmd.valve[i];
      ds.cmd(t, nr + i) = s.cmd.blind[i];
    }
    ds.cmd(t, 2 * nr) = s.cmd.t_flow;
    ds.cmd(t, 2 * nr + 1) = s.cmd.t_air;
    ds.cmd(t, 2 * nr + 2) = s.cmd.c_r;
    ds.ext(t, 0) = sample.t_out;
    ds.ext(t, 1) = sample.irr;
    s = building_step(rooms, s, sample, w.dt);
    for (int i = 0; i < nr; ++i) ds.obs(t, i) = s.t_room[i];
  }
  return ds;
}

}  // namespace rmc::sim
