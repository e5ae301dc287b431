#include "rmc/sim/weather.hpp"

#include <algorithm>
#include <cmath>

#include "rmc/core/rng.hpp"

namespace rmc::sim {

using core::require;

double step_hour(const WeatherSeries& w, int t) {
  return 24.0 * (t % w.steps_per_day) / static_cast<double>(w.steps_per_day);
}

WeatherSeries gen_weather(WeatherProfile profile, uint64_t seed, int n_steps) {
  require(n_steps > 0, "gen_weather: need at least one step");
  WeatherSeries w;
  w.t_out.resize(n_steps);
  w.irr.resize(n_steps);

  core::Rng g(seed);
  double temp_noise = 0.0;  // slow AR(1) wobble so days differ under one profile
  double cloud = 1.0;       // smooth attenuation factor for irradiance

  for (int t = 0; t < n_steps; ++t) {
    const double hour = step_hour(w, t);
    const int day = t / w.steps_per_day;

    double mid, amp, peak_irr;
    switch (profile) {
      case WeatherProfile::cold_day:
        mid = 0.0;
        amp = 4.0;
        peak_irr = 450.0;
        break;
      case WeatherProfile::hot_day:
        mid = 27.0;
        amp = 5.0;
        peak_irr = 850.0;
        break;
      case WeatherProfile::cloudy_day:
        mid = 17.5;
        amp = 2.0;
        peak_irr = 200.0;
        break;
      case WeatherProfile::seasonal_year:
      default: {
        const double phase = 2.0 * M_PI * day / 365.0;
        mid = 12.0 - 10.0 * std::cos(phase);
        amp = 5.0;
        peak_irr = 550.0 - 330.0 * std::cos(phase);
        break;
      }
    }

    temp_noise = 0.98 * temp_noise + core::uniform(g, -0.08, 0.08);
    cloud = std::clamp(0.995 * cloud + core::uniform(g, -0.01, 0.012), 0.35, 1.0);

    // Daily minimum near 03:00, maximum near 15:00.
    double temp = mid - amp * std::cos(2.0 * M_PI * (hour - 3.0) / 24.0) + temp_noise;
    if (profile == WeatherProfile::cloudy_day) temp = std::clamp(temp, 15.0, 20.0);
    w.t_out[t] = temp;

    double irr = 0.0;
    if (hour >= 6.0 && hour <= 18.0) irr = peak_irr * std::sin(M_PI * (hour - 6.0) / 12.0);
    if (profile == WeatherProfile::cloudy_day) irr *= 0.9 * cloud;
    else irr *= cloud;
    w.irr[t] = std::max(0.0, irr);
  }
  return w;
}

}  // namespace rmc::sim
