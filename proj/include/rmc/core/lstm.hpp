#pragma once

#include <span>
#include <utility>

#include "rmc/core/rng.hpp"
#include "rmc/core/types.hpp"

namespace rmc::core {

// Single LSTM layer with one combined weight matrix. Gate rows are ordered
// input, forget, cell candidate, output; each block is `hidden` rows. The
// matrix multiplies the concatenation [x_t, h_prev].
struct Lstm {
  int input_dim = 0;
  int hidden = 0;
  Mat w;  // (4*hidden) x (input_dim + hidden)
  Vec b;  // 4*hidden

  static Lstm zeros(int input_dim, int hidden);

  // Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases except the
  // forget-gate block which starts at +1 so cells initially retain state.
  void init(Rng& g);

  size_t param_count() const { return w.size() + b.size(); }
};

struct LstmState {
  Vec c, h;
  explicit LstmState(int hidden) : c(hidden, 0.0), h(hidden, 0.0) {}
  LstmState() = default;
};

// Applies one recurrence step in place. `zbuf` must have 4*hidden entries and
// is clobbered; passing it in keeps the unrolled loops allocation free.
void lstm_step(const Lstm& cell, std::span<const double> x, LstmState& s, Vec& zbuf);

// Convenience form returning fresh (c, h).
std::pair<Vec, Vec> lstm_step(const Lstm& cell, std::span<const double> x, const Vec& c_prev,
                              const Vec& h_prev);

}  // namespace rmc::core
