#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rmc/core/types.hpp"
#include "rmc/rl/building_env.hpp"
#include "rmc/sim/building.hpp"

namespace rmc::eval {

using core::Vec;

// Blind strategies reproducing the historical control of the plant:
//   schedule      fixed four-hour closing windows by facade orientation
//   conservative  full close above 25.5 degrees and 400 W/m2, half above 24
//   eager         full close above 24.5 degrees and 300 W/m2, half above 24
//   open          blinds stay open
enum class BlindRule { schedule, conservative, eager, open };

// Blind position 0 (open), 2 (half), or 4 (closed) for one room.
int blind_rule(BlindRule rule, int orientation, double t_room, double irr, double hour);

// Water supply temperature from a weather-compensated curve given as
// (outdoor, supply) knots sorted by outdoor temperature; linear between
// knots, clamped outside.
double heating_curve_supply(const std::vector<std::pair<double, double>>& curve, double t_out);

// Rule-based whole-building controller: blinds per rule, heating water
// from the curve, shared-pipe changeover switched by the sign of the
// dead-banded room demand, and supply air corrected linearly toward the
// setpoint from weather, mode, and demand.
struct BaselineController {
  std::string id = "baseline";
  BlindRule blinds = BlindRule::schedule;
  std::vector<std::pair<double, double>> heating_curve = {
      {-10.0, 45.0}, {0.0, 39.0}, {10.0, 32.0}, {20.0, 25.0}};
  double t_cool = 12.0;
  double band_hi = 0.5;   // demand counts above setpoint + band_hi
  double band_lo = -0.2;  // or below setpoint + band_lo
  Vec vent_coef = {23.0, -0.05, -1.0, -0.6};  // 1, t_out, mode, mean demand
  double t_air_lo = 15.0;
  double t_air_hi = 27.0;
  double c_r = 1.0;
  bool cooling = false;  // changeover state, persists across steps

  void validate() const;
};

struct BaselineObs {
  Vec room_temps;
  double t_out = 0.0;
  double irr = 0.0;
  double hour = 0.0;
};

struct BaselineCommand {
  std::vector<int> blind;
  rl::SupplyCommand supply;
  bool cooling = false;
};

// One control decision; updates the controller's changeover state.
BaselineCommand baseline_step(BaselineController& c, const std::vector<sim::RoomSpec>& rooms,
                              const BaselineObs& obs);

// Adapter for driving the surrogate environment's supply side with the
// controller's global rule. The returned callable owns a copy of the
// controller and carries its changeover state across steps.
rl::SupplyRule make_supply_rule(const BaselineController& c);

}  // namespace rmc::eval
