#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmc::core {

using Vec = std::vector<double>;

// Dense row-major matrix. The training loops need contiguous storage and a
// fixed iteration order, nothing more.
struct Mat {
  int rows = 0;
  int cols = 0;
  Vec a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0)
      : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

  double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

  std::span<double> row(int r) { return {a.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }
  std::span<const double> row(int r) const {
    return {a.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }

  size_t size() const { return a.size(); }
  void fill(double v) { a.assign(a.size(), v); }

  // Resizes and zeroes without giving up capacity; scratch buffers lean on
  // this to stay allocation free across repeated calls.
  void reshape(int r, int c) {
    rows = r;
    cols = c;
    a.assign(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0);
  }
};

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when a forward/backward pass produces a non-finite value.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

bool all_finite(std::span<const double> xs);

}  // namespace rmc::core
