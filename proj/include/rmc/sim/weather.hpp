#pragma once

#include <cstdint>

#include "rmc/core/types.hpp"

namespace rmc::sim {

enum class WeatherProfile { cold_day, hot_day, cloudy_day, seasonal_year };

struct WeatherSeries {
  core::Vec t_out;  // °C per step
  core::Vec irr;    // W/m² per step, zero at night
  double dt = 600.0;
  int steps_per_day = 144;
};

// Synthetic outdoor conditions: diurnal temperature swing under a seasonal
// envelope plus seeded smooth noise; irradiance follows a clipped solar arc.
// cloudy_day keeps temperatures in 15-20 °C with weak irradiance.
WeatherSeries gen_weather(WeatherProfile profile, uint64_t seed, int n_steps);

// Hour of day in [0, 24) for a step index.
double step_hour(const WeatherSeries& w, int t);

}  // namespace rmc::sim
