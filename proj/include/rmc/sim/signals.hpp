#pragma once

#include "rmc/core/rng.hpp"
#include "rmc/core/types.hpp"

namespace rmc::sim {

enum class SignalShape { sinusoid, square, steps };

struct SignalSpec {
  SignalShape shape = SignalShape::steps;
  double amp_lo = -2.0;  // for sinusoid/square: amplitude range (amp_lo >= 0);
  double amp_hi = 2.0;   // for steps: the level range itself
  int period_lo = 50;    // steps per cycle (sinusoid/square) or hold (steps)
  int period_hi = 300;
};

// Piecewise excitation series. Each segment redraws its amplitude and period,
// so spectra stay broad; sinusoid segments are whole cycles and join at zero.
core::Vec gen_signal(const SignalSpec& spec, int n_steps, core::Rng& g);

}  // namespace rmc::sim
