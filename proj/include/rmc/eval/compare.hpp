#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rmc/eval/baseline.hpp"
#include "rmc/eval/metrics.hpp"
#include "rmc/rl/building_env.hpp"
#include "rmc/rl/policy.hpp"
#include "rmc/sim/dataset.hpp"
#include "rmc/sim/weather.hpp"
#include "rmc/sysid/reduced_model.hpp"

namespace rmc::eval {

// One controller entry for the comparison table. Rule controllers carry a
// BaselineController; room policies carry trained blind heads and run under
// the default rule-based supply; full policies add a trained supply head on
// top of their frozen blind heads.
struct ControllerSpec {
  enum class Kind { rule, room_policy, full_policy };

  std::string id;
  Kind kind = Kind::rule;
  BaselineController rule;   // rule kind; also the supply used by room policies
  rl::PolicyBundle blinds;   // room_policy and full_policy
  rl::PolicyBundle supply;   // full_policy, exactly one continuous head

  void validate(int rooms) const;
};

struct ModelSpec {
  std::string id;
  std::shared_ptr<const sysid::ReducedModel> model;
};

struct EvalSetup {
  std::vector<sim::RoomSpec> rooms;
  std::shared_ptr<const sim::EpisodeDataset> history;  // primes the surrogates
  int days = 2;
  sim::WeatherProfile profile = sim::WeatherProfile::seasonal_year;
  uint64_t weather_seed = 9;
  rl::RewardSpec reward;  // environments validate it; metrics don't use it
};

// Runs every controller on every surrogate model over the same weather and
// reports comfort and energy per pair. Pairs are independent; the result
// does not depend on evaluation order.
std::vector<MetricReport> compare(const std::vector<ControllerSpec>& controllers,
                                  const std::vector<ModelSpec>& models, const EvalSetup& setup);

// Free-run accuracy of one surrogate against recorded observations,
// averaged over evenly spaced segments. With unit_circle set the first two
// channels are scored as (sin, cos) of an angle.
MetricReport model_accuracy(const std::string& model_id, const sysid::ReducedModel& model,
                            const sim::EpisodeDataset& data, int horizon, bool unit_circle);

}  // namespace rmc::eval
