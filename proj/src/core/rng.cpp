#include "rmc/core/rng.hpp"

namespace rmc::core {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

uint64_t derive_seed(uint64_t master, std::string_view stage) {
  // FNV-1a over the label, then mix the master seed in and scramble. The
  // scramble matters: FNV alone leaves correlated low bits for short labels.
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : stage) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return splitmix64(h ^ splitmix64(master));
}

double uniform(Rng& g, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(g);
}

int uniform_int(Rng& g, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  return d(g);
}

double normal(Rng& g, double mean, double stddev) {
  std::normal_distribution<double> d(mean, stddev);
  return d(g);
}

}  // namespace rmc::core
