#pragma once

#include <vector>

#include "rmc/core/types.hpp"

namespace rmc::sim {

using core::Vec;

// Orientation indices used throughout: 0=N, 1=E, 2=S, 3=W.
struct RoomSpec {
  int floor = 0;        // doubles as the ventilation zone id
  int orientation = 0;
  double size = 20.0;   // m²; scales capacities and gains below
  double r_out = 0.04;  // K/W, wall node to outdoors
  double r_in = 0.0067; // K/W, wall node to room air
  double cap_air = 1.0e6;   // J/K, air + light internal mass
  double cap_wall = 8.0e6;  // J/K
  double window_gain = 3.0; // m² effective solar aperture at this size
  double alpha = 0.6;       // coil mixing coefficient
  double vent_coeff = 40.0; // W/K per unit air-change-equivalent flow
  double leak_ua = 8.0;     // W/K direct infiltration
};

// Building-wide commands. The two-pipe system carries one water temperature;
// heating or cooling is implied by its value after changeover.
struct BuildingCommand {
  Vec valve;               // per room, O in [0,1]
  std::vector<int> blind;  // per room, 0 (open) .. 4 (fully closed)
  double t_flow = 20.0;    // °C water supply
  double t_air = 20.0;     // °C ventilation supply air
  double c_r = 1.0;        // 1/h air change rate
};

struct BuildingState {
  Vec t_room, t_wall;
  BuildingCommand cmd;
};

struct WeatherSample {
  double t_out = 15.0;
  double irr = 0.0;  // W/m²
  double hour = 12.0;
};

// Thermal power the water coil and the air handling put in (+) or take
// out (−) of the building over the last step, in watts.
struct StepEnergy {
  double coil_w = 0.0;
  double ahu_w = 0.0;
};

// Effective supply temperature after the coil mixes ventilation air with the
// water circuit: (T_air·C_r + α·T_flow·O)/(C_r + α·O).
double t_eff(double t_air_supply, double c_r, double alpha, double t_flow, double valve);

// Instantaneous coil and air-handling power for given room temperatures and
// commands; the water-coil part is alpha*O*(T_flow - T_room) per room, the
// air side C_r*(T_air - T_out).
StepEnergy building_power(const std::vector<RoomSpec>& rooms, const Vec& t_room,
                          const BuildingCommand& cmd, double t_out);

// Diurnal solar exposure weight for a facade orientation, in [0, 1].
double orientation_factor(int orientation, double hour);

// One explicit-Euler advance of all air and wall nodes under the commands
// stored in the state. Optionally reports coil/air-handling power.
BuildingState building_step(const std::vector<RoomSpec>& rooms, const BuildingState& s,
                            const WeatherSample& w, double dt, StepEnergy* energy = nullptr);

// Aggregate heating(−)/cooling(+) demand. Rooms enter the sum only when
// their deviation from the setpoint leaves the (−0.2, +0.5) °C dead band; a
// zero return means the changeover keeps its previous mode.
double changeover_demand(const Vec& t_room, double setpoint);

// Proportional thermostat: valves open linearly over `band` degrees of
// deviation on the active side of the setpoint.
Vec thermostat_valves(const Vec& t_room, double setpoint, bool cooling, double band = 1.5);

// Two floors times four orientations, sizes varied per room.
std::vector<RoomSpec> mini_building();

// Zero commands, all nodes at the given temperature.
BuildingState initial_state(const std::vector<RoomSpec>& rooms, double temp);

}  // namespace rmc::sim
