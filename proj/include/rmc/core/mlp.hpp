#pragma once

#include <span>
#include <vector>

#include "rmc/core/rng.hpp"
#include "rmc/core/types.hpp"

namespace rmc::core {

// Fully connected net, ReLU on hidden layers, identity on the output layer.
struct Mlp {
  std::vector<Mat> w;  // layer k: out_k x in_k
  std::vector<Vec> b;

  static Mlp zeros(const std::vector<int>& sizes);  // sizes = {in, h1, ..., out}
  void init(Rng& g);                                // uniform +-1/sqrt(fan_in), zero biases

  int in_dim() const { return w.empty() ? 0 : w.front().cols; }
  int out_dim() const { return w.empty() ? 0 : w.back().rows; }
  int layers() const { return static_cast<int>(w.size()); }
  size_t param_count() const;
};

void mlp_forward(const Mlp& net, std::span<const double> x, Vec& out);
Vec mlp_forward(const Mlp& net, std::span<const double> x);

Mlp zeros_like(const Mlp& net);

// Layer activations kept around for a backward pass. act[0] is the input,
// act[k+1] the (post-ReLU) output of layer k; act.back() is the net output.
struct MlpTrace {
  std::vector<Vec> act;
};

void mlp_forward_cached(const Mlp& net, std::span<const double> x, MlpTrace& tr);

// Accumulates parameter gradients for dLoss/d(output) = dout into `grads`
// (which must be zeros_like-shaped); optionally reports dLoss/d(input).
void mlp_backward(const Mlp& net, const MlpTrace& tr, std::span<const double> dout, Mlp& grads,
                  Vec* dx = nullptr);

}  // namespace rmc::core
