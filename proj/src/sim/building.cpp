#include "rmc/sim/building.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rmc::sim {

using core::require;

double t_eff(double t_air_supply, double c_r, double alpha, double t_flow, double valve) {
  const double denom = c_r + alpha * valve;
  if (denom <= 0.0) throw std::domain_error("t_eff: degenerate mixing, C_r + alpha*O <= 0");
  return (t_air_supply * c_r + alpha * t_flow * valve) / denom;
}

double orientation_factor(int orientation, double hour) {
  auto bump = [hour](double peak, double width) {
    const double z = (hour - peak) / width;
    return std::exp(-z * z);
  };
  switch (orientation) {
    case 1: return bump(9.0, 2.5);    // east
    case 2: return bump(12.5, 3.5);   // south
    case 3: return bump(16.0, 2.5);   // west
    default: return 0.25;             // north: diffuse only
  }
}

StepEnergy building_power(const std::vector<RoomSpec>& rooms, const Vec& t_room,
                          const BuildingCommand& cmd, double t_out) {
  require(t_room.size() == rooms.size() && cmd.valve.size() == rooms.size(),
          "building_power: size mismatch");
  StepEnergy e;
  for (size_t i = 0; i < rooms.size(); ++i) {
    const RoomSpec& r = rooms[i];
    const double scale = r.size / 20.0;
    // Split of the mixed-stream heat into its water-coil and air-side parts:
    // alpha*O*(T_flow - T_room) + C_r*(T_air - T_room) = flow*(T_eff - T_room).
    e.coil_w += r.vent_coeff * scale * r.alpha * cmd.valve[i] * (cmd.t_flow - t_room[i]);
    e.ahu_w += r.vent_coeff * scale * cmd.c_r * (cmd.t_air - t_out);
  }
  return e;
}

BuildingState building_step(const std::vector<RoomSpec>& rooms, const BuildingState& s,
                            const WeatherSample& w, double dt, StepEnergy* energy) {
  const size_t nr = rooms.size();
  require(s.t_room.size() == nr && s.t_wall.size() == nr, "building_step: state size mismatch");
  require(s.cmd.valve.size() == nr && s.cmd.blind.size() == nr,
          "building_step: command size mismatch");

  BuildingState out = s;
  for (size_t i = 0; i < nr; ++i) {
    const RoomSpec& r = rooms[i];
    const double o = s.cmd.valve[i];
    require(o >= 0.0 && o <= 1.0, "building_step: valve out of range");
    require(s.cmd.blind[i] >= 0 && s.cmd.blind[i] <= 4, "building_step: blind out of range");

    const double scale = r.size / 20.0;
    const double tr = s.t_room[i];
    const double tw = s.t_wall[i];

    const double teff = t_eff(s.cmd.t_air, s.cmd.c_r, r.alpha, s.cmd.t_flow, o);
    const double flow = s.cmd.c_r + r.alpha * o;  // air-change-equivalent flow
    const double q_vent = r.vent_coeff * scale * flow * (teff - tr);
    const double q_sol = r.window_gain * scale * w.irr *
                         orientation_factor(r.orientation, w.hour) *
                         (1.0 - s.cmd.blind[i] / 4.0);
    const double q_wall = (tw - tr) / r.r_in;
    const double q_leak = r.leak_ua * scale * (w.t_out - tr);

    out.t_room[i] = tr + dt / (r.cap_air * scale) * (q_wall + q_vent + q_sol + q_leak);
    out.t_wall[i] =
        tw + dt / (r.cap_wall * scale) * ((w.t_out - tw) / r.r_out + (tr - tw) / r.r_in);
  }
  if (energy) *energy = building_power(rooms, s.t_room, s.cmd, w.t_out);
  return out;
}

double changeover_demand(const Vec& t_room, double setpoint) {
  double demand = 0.0;
  for (double t : t_room) {
    const double d = t - setpoint;
    if (d > 0.5 || d < -0.2) demand += d;
  }
  return demand;
}

Vec thermostat_valves(const Vec& t_room, double setpoint, bool cooling, double band) {
  Vec o(t_room.size(), 0.0);
  for (size_t i = 0; i < t_room.size(); ++i) {
    const double d = cooling ? t_room[i] - setpoint : setpoint - t_room[i];
    o[i] = std::clamp(d / band, 0.0, 1.0);
  }
  return o;
}

std::vector<RoomSpec> mini_building() {
  std::vector<RoomSpec> rooms;
  const double sizes[8] = {18.0, 24.0, 30.0, 22.0, 20.0, 26.0, 28.0, 19.0};
  for (int i = 0; i < 8; ++i) {
    RoomSpec r;
    r.floor = i / 4;
    r.orientation = i % 4;
    r.size = sizes[i];
    rooms.push_back(r);
  }
  return rooms;
}

BuildingState initial_state(const std::vector<RoomSpec>& rooms, double temp) {
  BuildingState s;
  s.t_room.assign(rooms.size(), temp);
  s.t_wall.assign(rooms.size(), temp);
  s.cmd.valve.assign(rooms.size(), 0.0);
  s.cmd.blind.assign(rooms.size(), 0);
  return s;
}

}  // namespace rmc::sim
