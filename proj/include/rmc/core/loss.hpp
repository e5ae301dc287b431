#pragma once

#include "rmc/core/types.hpp"

namespace rmc::core {

enum class LossKind { squared, l1 };

// Mean over all entries of the elementwise penalty. Rows are time steps.
double sequence_loss(LossKind kind, const Mat& predicted, const Mat& target);

}  // namespace rmc::core
