#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rmc::core {

using Rng = std::mt19937_64;

// Derives an independent stream seed from one master seed and a stage label,
// so that re-running a single stage does not perturb the draws of any other.
uint64_t derive_seed(uint64_t master, std::string_view stage);

double uniform(Rng& g, double lo, double hi);
int uniform_int(Rng& g, int lo, int hi);  // inclusive bounds
double normal(Rng& g, double mean = 0.0, double stddev = 1.0);

}  // namespace rmc::core
