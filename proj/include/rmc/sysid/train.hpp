#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmc/sysid/reduced_model.hpp"

namespace rmc::sysid {

// First training stage: fit the reduced model to simulation rollouts.
// Encode lengths are jittered around the nominal n while decode lengths vary
// log-uniformly in [l/4, 2l], so the model cannot latch onto one horizon.
struct TrainConfig {
  int iterations = 1000;
  int batch = 128;
  double lr = 1e-4;
  double clip_norm = 5.0;
  double encode_jitter = 0.25;  // n_b ~ U[(1-j)n, (1+j)n]
  int log_every = 50;
  int val_windows = 8;  // fixed (n, l) windows reserved at the dataset tail
  uint64_t seed = 0;

  void validate() const;
};

struct TrainLogRow {
  int iteration;
  double train_loss;
  double val_loss;  // NaN on rows between validation passes
};

struct TrainResult {
  std::vector<TrainLogRow> log;
  double final_val_loss = 0.0;
};

// Adam with gradient-norm clipping on the squared loss. The model's
// normalizer is refit on `data` before the first update. Throws NumericError
// (with the failing iteration in the message) if the loss goes non-finite.
TrainResult train_stage1(ReducedModel& model, const sim::EpisodeDataset& data,
                         const TrainConfig& cfg);

void save_train_log(const TrainResult& r, const std::string& path);

}  // namespace rmc::sysid
