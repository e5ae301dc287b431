#include "rmc/rl/reward.hpp"

#include <algorithm>
#include <cmath>

namespace rmc::rl {

namespace {

constexpr double kIdeal = 23.0;
constexpr double kBandHi = 26.0;
constexpr double kBandLo = 19.5;

double sq(double v) { return v * v; }

}  // namespace

void RewardSpec::validate() const {
  const double c[] = {alpha_t, alpha_c, alpha_max, alpha_min,
                      beta_f,  beta_v,  beta_max,  beta_min, beta_e};
  for (double v : c) core::require(v >= 0.0, "reward: coefficients must be nonnegative");
}

double reward_room(const RewardSpec& rs, double t_room, double t_closing) {
  return 1.0 - rs.alpha_t * sq(t_room - kIdeal) - rs.alpha_c * sq(t_closing) -
         rs.alpha_max * sq(std::max(t_room - kBandHi, 0.0)) -
         rs.alpha_min * sq(std::max(kBandLo - t_room, 0.0));
}

double reward_global(const RewardSpec& rs, const Vec& floor_means, const Vec& zone_means,
                     const Vec& room_temps, double e_cooling, double e_heating) {
  double r = 1.0;
  for (double t : floor_means) r -= rs.beta_f * sq(t - kIdeal);
  for (double t : zone_means) r -= rs.beta_v * sq(t - kIdeal);
  for (double t : room_temps) {
    r -= rs.beta_max * sq(std::max(t - kBandHi, 0.0));
    r -= rs.beta_min * sq(std::max(kBandLo - t, 0.0));
  }
  r -= rs.beta_e * (e_cooling + e_heating);
  return r;
}

double reward_pendulum(const sim::PendulumState& s, double torque) {
  return 1.0 - s.theta * s.theta - 0.1 * s.omega * s.omega - 0.001 * torque * torque;
}

}  // namespace rmc::rl
