#include "rmc/core/types.hpp"

#include <cmath>

namespace rmc::core {

bool all_finite(std::span<const double> xs) {
  for (double v : xs)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace rmc::core
