#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rmc/core/types.hpp"
#include "rmc/sim/building.hpp"
#include "rmc/sim/dataset.hpp"

namespace rmc::eval {

using core::Mat;
using core::Vec;

// Rectified linear energy estimator with per-coefficient sign constraints:
// predict(x) = max(0, w.x + b), and w[j] is kept nonnegative where
// sign[j] = +1, nonpositive where sign[j] = -1, free where 0. The
// constraints encode physics the fit must not contradict, e.g. a hotter
// heating supply can never reduce heating consumption.
struct EnergyModel {
  Vec w;
  double b = 0.0;
  std::vector<int> sign;

  void validate() const;
  double predict(std::span<const double> x) const;
};

// Least squares through the rectifier by projected gradient descent:
// after every step the constrained coefficients are clamped back to their
// half-line. Features are standardized internally, which preserves the
// constraint set since scales are positive. Degenerate input (too few
// rows, non-finite values, or a diverging loss) aborts the fit.
EnergyModel fit_energy_model(const Mat& x, const Vec& y, const std::vector<int>& sign,
                             int iters = 4000, double lr = 0.05);

// Mean absolute prediction error relative to the mean absolute target.
double relative_fit_error(const EnergyModel& m, const Mat& x, const Vec& y);

// Heating and cooling estimators over the shared feature layout
// [t_flow, t_air, c_r, t_out, irr].
struct BuildingEnergyModel {
  EnergyModel heating;
  EnergyModel cooling;
};

inline constexpr int kEnergyFeatures = 5;

// Feature matrix and per-mode kWh targets recomputed from a recorded
// dataset with the plant's own power split.
void building_energy_samples(const std::vector<sim::RoomSpec>& rooms,
                             const sim::EpisodeDataset& data, Mat& x, Vec& y_heat, Vec& y_cool);

BuildingEnergyModel fit_building_energy(const std::vector<sim::RoomSpec>& rooms,
                                        const sim::EpisodeDataset& data);

// Total (heating, cooling) kWh over a feature series, one row per step.
std::pair<double, double> energy_estimate(const BuildingEnergyModel& m, const Mat& features);

}  // namespace rmc::eval
