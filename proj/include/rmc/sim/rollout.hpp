#pragma once

#include "rmc/sim/building.hpp"
#include "rmc/sim/dataset.hpp"
#include "rmc/sim/pendulum.hpp"
#include "rmc/sim/weather.hpp"

namespace rmc::sim {

// Open-loop pendulum run. Row t of the dataset holds the torque applied at t
// and the observation of the state it produced; the same convention (command
// first, resulting observation on the same row) holds for the building.
EpisodeDataset rollout_pendulum(const PendulumConfig& cfg, const Vec& torque, PendulumState s0);

// Open-loop building run under per-step commands; weather provides the
// exogenous columns. Commands must not outnumber weather steps.
EpisodeDataset rollout_building(const std::vector<RoomSpec>& rooms, BuildingState s0,
                                const WeatherSeries& w,
                                const std::vector<BuildingCommand>& cmds);

}  // namespace rmc::sim
