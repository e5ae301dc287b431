#pragma once

#include <memory>
#include <span>
#include <vector>

#include "rmc/core/loss.hpp"
#include "rmc/core/lstm.hpp"
#include "rmc/core/mlp.hpp"
#include "rmc/core/optim.hpp"

namespace rmc::core {

// Encoder LSTM reads the full signal window; its final (c, h) seeds the
// decoder LSTM, which runs on commands and exogenous inputs only. A small
// head maps each decoder hidden state to one predicted observation vector.
struct EncDecNet {
  Lstm enc;
  Lstm dec;
  Mlp head;

  void validate() const;

  // Fixed traversal order: enc.w, enc.b, dec.w, dec.b, head layer 0 w, b, ...
  // Optimizer state and checkpoints rely on this order staying put.
  ParamSpans param_spans();
  GradSpans param_spans() const;
  size_t param_count() const;

  EncDecNet zeros_like() const;
  void fill(double v);
};

// One training window, already normalized.
struct SeqSample {
  Mat enc_x;   // n x d
  Mat dec_x;   // l x d_sharp
  Mat target;  // l x d_obs
};

// Free-running prediction: encode enc_x from a zero state, hand (c, h) to the
// decoder, emit one head output per decoder step. Returns l x d_obs.
Mat encdec_forward(const EncDecNet& net, const Mat& enc_x, const Mat& dec_x);

// Scratch buffers for batched backpropagation. One workspace may be reused
// across calls with varying batch shapes; buffers grow as needed.
struct BatchWorkspace;
struct WorkspaceDeleter {
  void operator()(BatchWorkspace*) const;
};
using WorkspacePtr = std::unique_ptr<BatchWorkspace, WorkspaceDeleter>;
WorkspacePtr make_workspace();

// Mean loss over the batch; parameter gradients of that mean are accumulated
// into `grads` (overwritten). The batch is split into a fixed number of
// chunks combined in chunk order, so results do not depend on thread count.
double batch_gradients(const EncDecNet& net, std::span<const SeqSample> batch, LossKind kind,
                       EncDecNet& grads, BatchWorkspace& ws, bool parallel = true);

// Straight-line single-threaded reference for the kernel above.
double batch_gradients_serial(const EncDecNet& net, std::span<const SeqSample> batch,
                              LossKind kind, EncDecNet& grads, BatchWorkspace& ws);

// Loss and gradients for a single sequence (batch of one).
double backprop_sequence(const EncDecNet& net, const SeqSample& sample, LossKind kind,
                         EncDecNet& grads, BatchWorkspace& ws);

}  // namespace rmc::core
