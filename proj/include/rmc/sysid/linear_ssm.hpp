#pragma once

#include <stdexcept>

#include "rmc/sim/dataset.hpp"

namespace rmc::sysid {

using core::Mat;

// Discrete-time linear model x(t+1) = A x(t) + B u(t), y(t) = C x(t) + D u(t)
// identified by a subspace projection of block-Hankel data. Plays the
// classical-baseline role against the recurrent model.
struct LinearSSM {
  int order = 0;
  int d_in = 0;
  int d_out = 0;
  Mat A, B, C, D;
  double spectral_radius = 0.0;
  bool stable = false;
};

struct IdentificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inputs are the dataset's [cmd, ext] columns, outputs its observations.
// Degenerate (e.g. all-zero) data yields a zero-response model rather than an
// error; only insufficient length throws.
LinearSSM fit_linear_ssm(const sim::EpisodeDataset& hist, int order);

// Free-run prediction mirroring the recurrent decoder. The initial state is
// least-squares fit on the warm window (u rows [0, warm) with y_warm), then
// the model runs open loop over u rows [warm, end). Returns those rows'
// predictions; any |ŷ| above 1e6 aborts with DivergenceError.
Mat predict_linear_ssm(const LinearSSM& m, const Mat& u, const Mat& y_warm);

void save_linear_ssm(const LinearSSM& m, const std::string& path);
LinearSSM load_linear_ssm(const std::string& path);

}  // namespace rmc::sysid
