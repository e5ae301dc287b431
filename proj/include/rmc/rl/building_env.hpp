#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "rmc/core/lstm.hpp"
#include "rmc/rl/noise.hpp"
#include "rmc/rl/reward.hpp"
#include "rmc/rl/runner.hpp"
#include "rmc/sim/building.hpp"
#include "rmc/sim/dataset.hpp"
#include "rmc/sim/weather.hpp"
#include "rmc/sysid/reduced_model.hpp"

namespace rmc::rl {

// Water and air supply settings chosen by rule when no trained supervisory
// policy drives the plant: a weather-compensated heating curve, fixed
// chilled-water temperature, neutral air supply.
struct SupplyCommand {
  double t_heat = 40.0;
  double t_cool = 12.0;
  double t_air = 21.0;
  double c_r = 1.0;
};

SupplyCommand baseline_supply(double t_out);

// Everything a rule-based supply controller may look at for one step. The
// mode is the changeover state before this step's demand update.
struct SupplyContext {
  double t_out = 0.0;
  double irr = 0.0;
  double hour = 0.0;
  bool cooling = false;
  Vec room_temps;
};

using SupplyRule = std::function<SupplyCommand(const SupplyContext&)>;

// Observation layout shared by the room and supervisory heads:
//   [0, nr)            normalized room temperatures (perturbed in training)
//   [nr, nr+nf)        floor means of the above
//   nr+nf              building mean
//   +1, +2             normalized outdoor temperature, irradiance
//   +3, +4             sin/cos of the hour of day
//   [.., ..+nr)        trailing-day blind closure fraction per room
//   last               changeover mode, +1 cooling, -1 heating
int building_obs_dim(int rooms, int floors);
std::vector<int> room_head_channels(int room, int rooms, int floors);
std::vector<int> supervisory_channels(int rooms, int floors);

struct BuildingEnvConfig {
  RewardSpec reward;
  int episode_steps = 288;  // two days of 10-minute steps
  double setpoint = 23.0;
  sim::WeatherProfile profile = sim::WeatherProfile::seasonal_year;
  uint64_t weather_seed = 1;  // vary per worker for domain randomization
  ObsNoise noise;             // on normalized model outputs, training only
  bool supervisory = false;   // false: one blind head per room under rule-based
                              // supply; true: one 4-dim supply head over the
                              // frozen blind policies below
  std::vector<PolicyHead> blind_heads;
  SupplyRule supply_rule;     // replaces baseline_supply in the room phase
};

// Control episodes on a learned building surrogate instead of the plant.
// The surrogate's encoder is primed on a window of recorded history, then
// its decoder free-runs under the commands the policies choose; room
// thermostats and heat/cool changeover stay rule-based, as in the plant.
class BuildingEnv : public Env {
 public:
  BuildingEnv(std::shared_ptr<const sysid::ReducedModel> model,
              std::shared_ptr<const sim::EpisodeDataset> history,
              std::vector<sim::RoomSpec> rooms, const BuildingEnvConfig& cfg);

  int obs_dim() const override;
  int head_count() const override;
  void set_training(bool on) override { training_ = on; }
  Vec reset(core::Rng& g) override;
  StepResult step(const std::vector<HeadAction>& actions, core::Rng& g, Vec& next_obs) override;

  const Vec& room_temps() const { return temps_; }
  double closing_hours(int room) const { return closing_sum_.at(room); }
  bool cooling_mode() const { return cooling_; }
  double current_t_out() const;
  double current_irr() const;
  double current_hour() const;
  // (heating, cooling) kWh spent by the last step
  std::pair<double, double> last_energy() const { return {e_heat_, e_cool_}; }

 private:
  Vec observation() const;
  void advance_model(const sim::BuildingCommand& cmd, double t_out, double irr, core::Rng& g);

  std::shared_ptr<const sysid::ReducedModel> model_;
  std::shared_ptr<const sim::EpisodeDataset> hist_;
  std::vector<sim::RoomSpec> rooms_;
  BuildingEnvConfig cfg_;
  int n_floors_ = 0;
  bool training_ = true;

  sim::WeatherSeries weather_;
  core::LstmState dec_state_;
  Vec zbuf_, xbuf_, pred_norm_;
  Vec temps_;        // denormalized, noise included while training
  Vec closing_sum_;  // trailing-day closure hours per room
  std::vector<Vec> closing_ring_;
  int ring_pos_ = 0;
  bool cooling_ = false;
  double e_heat_ = 0.0, e_cool_ = 0.0;
  ObsNoise noise_;
  int t_ = 0;
  int episode_ = 0;
};

// One discrete blind head (5 positions) per room.
PolicyBundle make_blind_policy(int rooms, int floors, const std::vector<int>& hidden,
                               double p_switch, core::Rng& g);

// One Gaussian head emitting [heating water, cooling water, supply air,
// air change rate] within fixed plant limits.
PolicyBundle make_supply_policy(int rooms, int floors, const std::vector<int>& hidden,
                                core::Rng& g);

}  // namespace rmc::rl
