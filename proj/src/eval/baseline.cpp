#include "rmc/eval/baseline.hpp"

#include <algorithm>
#include <cmath>

namespace rmc::eval {

using core::require;

int blind_rule(BlindRule rule, int orientation, double t_room, double irr, double hour) {
  switch (rule) {
    case BlindRule::schedule:
      // north and east facades in the morning, south around noon,
      // west in the afternoon; four hours each
      switch (orientation) {
        case 2: return hour >= 10.0 && hour < 14.0 ? 4 : 0;   // south
        case 3: return hour >= 14.0 && hour < 18.0 ? 4 : 0;   // west
        default: return hour >= 8.0 && hour < 12.0 ? 4 : 0;   // north, east
      }
    case BlindRule::conservative:
      if (t_room > 25.5 && irr > 400.0) return 4;
      if (t_room > 24.0 && irr > 400.0) return 2;
      return 0;
    case BlindRule::eager:
      if (t_room > 24.5 && irr > 300.0) return 4;
      if (t_room > 24.0 && irr > 400.0) return 2;
      return 0;
    case BlindRule::open: return 0;
  }
  return 0;
}

double heating_curve_supply(const std::vector<std::pair<double, double>>& curve, double t_out) {
  require(!curve.empty(), "heating curve: empty table");
  if (t_out <= curve.front().first) return curve.front().second;
  if (t_out >= curve.back().first) return curve.back().second;
  for (size_t k = 1; k < curve.size(); ++k) {
    if (t_out <= curve[k].first) {
      const double span = curve[k].first - curve[k - 1].first;
      const double a = (t_out - curve[k - 1].first) / span;
      return curve[k - 1].second + a * (curve[k].second - curve[k - 1].second);
    }
  }
  return curve.back().second;
}

void BaselineController::validate() const {
  require(!heating_curve.empty(), "baseline: empty heating curve");
  for (size_t k = 0; k < heating_curve.size(); ++k) {
    require(std::isfinite(heating_curve[k].first) && std::isfinite(heating_curve[k].second),
            "baseline: non-finite curve knot");
    if (k > 0) {
      require(heating_curve[k].first > heating_curve[k - 1].first,
              "baseline: curve knots must increase in outdoor temperature");
      require(heating_curve[k].second <= heating_curve[k - 1].second,
              "baseline: supply must not rise with outdoor temperature");
    }
  }
  require(std::isfinite(band_hi) && std::isfinite(band_lo) && band_hi > 0.0 && band_lo < 0.0,
          "baseline: dead band must straddle zero");
  require(vent_coef.size() == 4, "baseline: ventilation correction needs four coefficients");
  require(t_air_lo < t_air_hi, "baseline: supply air limits inverted");
  require(t_cool > 0.0 && c_r > 0.0, "baseline: nonpositive supply settings");
}

namespace {

// Shared supply decision: switch the changeover on dead-banded demand, read
// the heating curve, correct the air supply toward the setpoint.
rl::SupplyCommand supply_decision(BaselineController& c, const Vec& room_temps, double t_out) {
  double demand = 0.0;
  for (double t : room_temps) {
    const double d = t - 23.0;
    if (d > c.band_hi || d < c.band_lo) demand += d;
  }
  if (demand != 0.0) c.cooling = demand > 0.0;

  rl::SupplyCommand s;
  s.t_heat = heating_curve_supply(c.heating_curve, t_out);
  s.t_cool = c.t_cool;
  const double mode = c.cooling ? 1.0 : -1.0;
  const double n = std::max<double>(static_cast<double>(room_temps.size()), 1.0);
  s.t_air = std::clamp(
      c.vent_coef[0] + c.vent_coef[1] * t_out + c.vent_coef[2] * mode + c.vent_coef[3] * demand / n,
      c.t_air_lo, c.t_air_hi);
  s.c_r = c.c_r;
  return s;
}

}  // namespace

BaselineCommand baseline_step(BaselineController& c, const std::vector<sim::RoomSpec>& rooms,
                              const BaselineObs& obs) {
  const int nr = static_cast<int>(rooms.size());
  require(static_cast<int>(obs.room_temps.size()) == nr, "baseline: one temperature per room");

  BaselineCommand out;
  out.blind.resize(nr);
  for (int i = 0; i < nr; ++i)
    out.blind[i] = blind_rule(c.blinds, rooms[i].orientation, obs.room_temps[i], obs.irr, obs.hour);
  out.supply = supply_decision(c, obs.room_temps, obs.t_out);
  out.cooling = c.cooling;
  return out;
}

rl::SupplyRule make_supply_rule(const BaselineController& c) {
  c.validate();
  return [state = c](const rl::SupplyContext& ctx) mutable {
    return supply_decision(state, ctx.room_temps, ctx.t_out);
  };
}

}  // namespace rmc::eval
