#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rmc/core/types.hpp"

namespace rmc::core {

// First/second moment buffers over one flat parameter ordering. Callers must
// pass the parameter blocks in the same order on every update.
struct AdamState {
  Vec m, v;
  int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}
  AdamState() = default;
};

using ParamSpans = std::vector<std::span<double>>;
using GradSpans = std::vector<std::span<const double>>;

// One bias-corrected update with step size `lr`.
void adam_update(AdamState& st, const ParamSpans& params, const GradSpans& grads, double lr);

// Vanilla gradient step; parameter blocks are modified in place.
void sgd_update(const ParamSpans& params, const GradSpans& grads, double lr);

// Scales all blocks by max_norm/norm when the global L2 norm exceeds
// max_norm. Returns the pre-clip norm.
double clip_grad_norm(const std::vector<std::span<double>>& grads, double max_norm);

struct LrSchedule {
  enum class Kind { constant, slanted_triangular };
  Kind kind = Kind::constant;
  double eta_max = 1e-4;
  // slanted-triangular shape parameters
  double cut_frac = 0.1;
  double ratio = 40.0;
  int64_t total = 0;  // horizon; iterations run in [0, total]
};

double lr_at(const LrSchedule& s, int64_t n);

}  // namespace rmc::core
