#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rmc/core/encdec.hpp"
#include "rmc/sim/dataset.hpp"

namespace rmc::sysid {

using core::Mat;
using core::Vec;

// Per-channel affine map over the concatenated [cmd, ext, obs] layout.
struct Normalizer {
  Vec mean, scale;

  static Normalizer identity(int width);
  static Normalizer fit(const sim::EpisodeDataset& ds);

  int width() const { return static_cast<int>(mean.size()); }
  double fwd(int ch, double v) const { return (v - mean[ch]) / scale[ch]; }
  double inv(int ch, double v) const { return v * scale[ch] + mean[ch]; }
};

// Encoder-decoder surrogate of one plant, together with the normalization
// constants and window sizes it was trained with.
struct ReducedModel {
  core::EncDecNet net;
  Normalizer norm;
  int d_cmd = 0, d_ext = 0, d_obs = 0;
  int n = 1;  // encode window length
  int l = 1;  // nominal decode length

  int d() const { return d_cmd + d_ext + d_obs; }
  int d_sharp() const { return d_cmd + d_ext; }
  void validate() const;

  // Runs the encoder over a raw n-step window of x = [cmd, ext, obs].
  std::pair<Vec, Vec> encode(const Mat& window) const;

  // Free-runs the decoder from (c, h) over raw x♯ inputs; returns
  // denormalized observation predictions, one row per step.
  Mat decode(const Vec& c, const Vec& h, const Mat& inputs) const;

  // Encodes rows [t0, t0+n) of the dataset and decodes the following
  // `horizon` rows. Returns denormalized predictions aligned with
  // ds.obs rows [t0+n, t0+n+horizon).
  Mat predict_segment(const sim::EpisodeDataset& ds, int t0, int horizon) const;
};

ReducedModel make_reduced_model(int d_cmd, int d_ext, int d_obs, int hidden,
                                const std::vector<int>& head_hidden, int n, int l,
                                core::Rng& g);

void save_reduced_model(const ReducedModel& m, const std::string& path);
ReducedModel load_reduced_model(const std::string& path);

// Normalized training window: encode rows [start, start+n_b), decode targets
// rows [start+n_b, start+n_b+l_b).
core::SeqSample make_sample(const sim::EpisodeDataset& ds, const Normalizer& norm, int start,
                            int n_b, int l_b);

}  // namespace rmc::sysid
