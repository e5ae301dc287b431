#include "rmc/core/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace rmc::core {

double sequence_loss(LossKind kind, const Mat& predicted, const Mat& target) {
  if (predicted.rows == 0 || predicted.cols == 0)
    throw std::domain_error("sequence_loss: empty sequence");
  require(predicted.rows == target.rows && predicted.cols == target.cols,
          "sequence_loss: shape mismatch");
  double acc = 0.0;
  for (size_t k = 0; k < predicted.a.size(); ++k) {
    const double d = predicted.a[k] - target.a[k];
    acc += kind == LossKind::squared ? d * d : std::fabs(d);
  }
  return acc / static_cast<double>(predicted.a.size());
}

}  // namespace rmc::core
