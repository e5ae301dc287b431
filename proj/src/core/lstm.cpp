#include "rmc/core/lstm.hpp"

#include <cmath>
#include <cstring>

namespace rmc::core {

Lstm Lstm::zeros(int input_dim, int hidden) {
  require(input_dim >= 0 && hidden > 0, "lstm: bad dimensions");
  Lstm cell;
  cell.input_dim = input_dim;
  cell.hidden = hidden;
  cell.w = Mat(4 * hidden, input_dim + hidden);
  cell.b.assign(static_cast<size_t>(4) * hidden, 0.0);
  return cell;
}

void Lstm::init(Rng& g) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols));
  for (double& v : w.a) v = uniform(g, -bound, bound);
  for (double& v : b) v = 0.0;
  for (int r = hidden; r < 2 * hidden; ++r) b[r] = 1.0;
}

static inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void lstm_step(const Lstm& cell, std::span<const double> x, LstmState& s, Vec& zbuf) {
  const int p = cell.hidden;
  const int d = cell.input_dim;
  require(static_cast<int>(x.size()) == d, "lstm_step: input size mismatch");
  require(static_cast<int>(s.c.size()) == p && static_cast<int>(s.h.size()) == p,
          "lstm_step: state size mismatch");
  require(static_cast<int>(zbuf.size()) == 4 * p, "lstm_step: scratch size mismatch");

  const int q = d + p;
  for (int r = 0; r < 4 * p; ++r) {
    const double* wr = cell.w.a.data() + static_cast<size_t>(r) * q;
    double acc = cell.b[r];
    for (int j = 0; j < d; ++j) acc += wr[j] * x[j];
    for (int j = 0; j < p; ++j) acc += wr[d + j] * s.h[j];
    zbuf[r] = acc;
  }
  for (int j = 0; j < p; ++j) {
    const double gi = sigmoid(zbuf[j]);
    const double gf = sigmoid(zbuf[p + j]);
    const double gg = std::tanh(zbuf[2 * p + j]);
    const double go = sigmoid(zbuf[3 * p + j]);
    s.c[j] = gf * s.c[j] + gi * gg;
    s.h[j] = go * std::tanh(s.c[j]);
  }
}

std::pair<Vec, Vec> lstm_step(const Lstm& cell, std::span<const double> x, const Vec& c_prev,
                              const Vec& h_prev) {
  LstmState s;
  s.c = c_prev;
  s.h = h_prev;
  Vec zbuf(static_cast<size_t>(4) * cell.hidden);
  lstm_step(cell, x, s, zbuf);
  return {std::move(s.c), std::move(s.h)};
}

}  // namespace rmc::core
