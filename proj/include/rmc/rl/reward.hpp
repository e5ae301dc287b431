#pragma once

#include "rmc/core/types.hpp"
#include "rmc/sim/pendulum.hpp"

namespace rmc::rl {

using core::Vec;

// Soft-constraint reward coefficients. Room rewards penalize deviation from
// 23 °C, blind closing time, and comfort-band violations; the supervisory
// reward penalizes floor/zone mean deviations, per-room band violations, and
// energy use. All penalties enter quadratically except energy (linear).
struct RewardSpec {
  // per-room
  double alpha_t = 0.2;
  double alpha_c = 0.01;
  double alpha_max = 1.0;
  double alpha_min = 1.0;
  // supervisory
  double beta_f = 0.25;
  double beta_v = 0.25;
  double beta_max = 0.5;
  double beta_min = 0.5;
  double beta_e = 0.0;  // per kWh

  void validate() const;
};

// r = 1 - alpha_t*(T-23)^2 - alpha_c*t_closing^2
//       - alpha_max*max(T-26,0)^2 - alpha_min*max(19.5-T,0)^2
// t_closing in hours of full-closure equivalent over the trailing day.
double reward_room(const RewardSpec& rs, double t_room, double t_closing);

// r = 1 - sum_f beta_f*(Tf-23)^2 - sum_v beta_v*(Tv-23)^2
//       - beta_max*sum_i max(Ti-26,0)^2 - beta_min*sum_i max(19.5-Ti,0)^2
//       - beta_e*(E_cooling + E_heating), energies in kWh.
double reward_global(const RewardSpec& rs, const Vec& floor_means, const Vec& zone_means,
                     const Vec& room_temps, double e_cooling, double e_heating);

// r = 1 - theta^2 - 0.1*omega^2 - 0.001*torque^2
double reward_pendulum(const sim::PendulumState& s, double torque);

}  // namespace rmc::rl
