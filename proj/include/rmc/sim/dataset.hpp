#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmc/core/types.hpp"

namespace rmc::sim {

using core::Mat;
using core::Vec;

// Aligned command/exogenous/observation sequences at a fixed step size.
// Columns are grouped so that x(t) = [cmd, ext, obs] and x♯(t) = [cmd, ext].
struct EpisodeDataset {
  double dt = 1.0;  // seconds per step
  Mat cmd, ext, obs;
  std::vector<std::string> cmd_names, ext_names, obs_names;
  uint64_t seed = 0;
  std::string generator;

  int steps() const { return obs.rows; }
  int d_cmd() const { return cmd.cols; }
  int d_ext() const { return ext.cols; }
  int d_obs() const { return obs.cols; }
  int d_sharp() const { return cmd.cols + ext.cols; }
  int d_total() const { return d_sharp() + obs.cols; }

  void validate() const;

  // Writes [cmd, ext, obs] at step t into out (size d_total()).
  void fill_x(int t, std::span<double> out) const;
  // Writes [cmd, ext] at step t into out (size d_sharp()).
  void fill_x_sharp(int t, std::span<double> out) const;
};

// Writes `path` (CSV: t, cmd_*, ext_*, obs_*) plus `path + ".meta.json"`.
void save_dataset(const EpisodeDataset& ds, const std::string& path);
EpisodeDataset load_dataset(const std::string& path);

}  // namespace rmc::sim
