#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rmc/core/optim.hpp"
#include "rmc/sim/building.hpp"
#include "rmc/sim/weather.hpp"
#include "rmc/sysid/reduced_model.hpp"

namespace rmc::sysid {

// Fixed probe conditions used to measure how far a retrained model has
// drifted from its simulation-trained parent. Environmental sequences and
// command sequences are crossed; every pair gets its own encode prefix (the
// prefix carries observations, which depend on both).
struct StoppingSet {
  std::vector<Mat> env;     // each: steps x d_ext
  std::vector<Mat> cmd;     // each: steps x d_cmd
  std::vector<Mat> prefix;  // env.size()*cmd.size() windows, each n x d, env-major order

  int pairs() const { return static_cast<int>(env.size() * cmd.size()); }
  void validate() const;

  // Composed decoder input [cmd, ext] for pair (ei, ci).
  Mat x_sharp(int ei, int ci) const;
};

// Mean absolute difference between the two models' decoded outputs over the
// whole probe set (all pairs, steps, output channels), in raw output units.
double discrepancy(const ReducedModel& a, const ReducedModel& b, const StoppingSet& set);

enum class RetrainAlgo { full, fine };

struct RetrainConfig {
  RetrainAlgo algorithm = RetrainAlgo::full;
  double delta_max = 0.2;  // drift bound; zero trips at the first evaluation
  int n_max = 1000;        // update cap (per layer for fine)
  int p_eval = 32;         // evaluate drift every p_eval updates
  int batch = 128;
  double lr = 1e-4;        // full only (Adam)
  double clip_norm = 5.0;  // full only
  double mu = 1.0 / 2.6;   // fine only: rate decay per layer of depth from the output
  core::LrSchedule schedule;  // fine only; its horizon is overridden with n_max
  uint64_t seed = 0;

  void validate() const;
};

struct RetrainRecord {
  int layer;  // depth from the output layer; -1 when all weights train together
  int iteration;
  double delta;
};

struct RetrainTrace {
  std::vector<RetrainRecord> records;
  std::string exit_reason;  // "delta-exceeded" | "iteration-cap"
  double final_delta = 0.0;
  int iterations = 0;  // total updates applied across all phases
};

// Adapts every weight to historical data with Adam, pausing each p_eval
// updates to measure drift against the entry model. Stops when the drift
// bound is crossed or the update cap is reached; the trace records every
// measurement and the exit reason. n_max = 0 returns the model unchanged.
std::pair<ReducedModel, RetrainTrace> retrain_full(const ReducedModel& model,
                                                   const sim::EpisodeDataset& hist,
                                                   const RetrainConfig& cfg,
                                                   const StoppingSet& set);

// Conservative variant: only the head trains, one layer at a time starting at
// the output, with plain SGD at rate schedule(n) * mu^depth. Each layer gets
// a fresh iteration budget; a drift breach stops all remaining layers. The
// encoder and decoder come back bitwise identical.
std::pair<ReducedModel, RetrainTrace> retrain_fine(const ReducedModel& model,
                                                   const sim::EpisodeDataset& hist,
                                                   const RetrainConfig& cfg,
                                                   const StoppingSet& set);

// Probe set for the pendulum: one fixed window of the given dataset, encode
// prefix of model-length n, the rest decoded.
StoppingSet pendulum_stopping_set(const sim::EpisodeDataset& source, int n, int start,
                                  int length);

// Probe set for the building: synthetic day profiles crossed with fixed
// operating scenarios (ventilation/blind/valve settings held for a day).
// Encode prefixes are simulated with the physics model under each pairing.
StoppingSet building_stopping_set(const std::vector<sim::RoomSpec>& rooms, int n,
                                  uint64_t seed);

}  // namespace rmc::sysid
