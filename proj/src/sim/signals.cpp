#include "rmc/sim/signals.hpp"

#include <cmath>

namespace rmc::sim {

using core::require;
using core::uniform;
using core::uniform_int;
using core::Vec;

Vec gen_signal(const SignalSpec& spec, int n_steps, core::Rng& g) {
  require(n_steps > 0, "gen_signal: need at least one step");
  require(spec.amp_lo <= spec.amp_hi, "gen_signal: amplitude range inverted");
  require(spec.period_lo >= 2 && spec.period_lo <= spec.period_hi,
          "gen_signal: period range invalid");
  Vec out(n_steps, 0.0);
  int t = 0;
  switch (spec.shape) {
    case SignalShape::sinusoid:
      while (t < n_steps) {
        const int period = uniform_int(g, spec.period_lo, spec.period_hi);
        const double amp = uniform(g, spec.amp_lo, spec.amp_hi);
        for (int k = 0; k < period && t < n_steps; ++k, ++t)
          out[t] = amp * std::sin(2.0 * M_PI * k / period);
      }
      break;
    case SignalShape::square:
      while (t < n_steps) {
        const int period = uniform_int(g, spec.period_lo, spec.period_hi);
        const double amp = uniform(g, spec.amp_lo, spec.amp_hi);
        const int half = period / 2;
        for (int k = 0; k < period && t < n_steps; ++k, ++t)
          out[t] = k < half ? amp : -amp;
      }
      break;
    case SignalShape::steps:
      while (t < n_steps) {
        const int hold = uniform_int(g, spec.period_lo, spec.period_hi);
        const double level = uniform(g, spec.amp_lo, spec.amp_hi);
        for (int k = 0; k < hold && t < n_steps; ++k, ++t) out[t] = level;
      }
      break;
  }
  return out;
}

}  // namespace rmc::sim
