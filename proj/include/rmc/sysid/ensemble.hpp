#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "rmc/sysid/retrain.hpp"

namespace rmc::sysid {

// A set of retrained models with differing stopping parameters. The last
// `held_out` members never feed policy training; they exist to check that a
// policy generalizes across model error.
struct EnsembleSpec {
  std::vector<RetrainConfig> configs;
  int held_out = 1;

  void validate() const;  // 1 <= held_out < configs.size()
};

struct EnsembleMember {
  std::string id;
  RetrainAlgo algorithm = RetrainAlgo::full;
  double delta_max = 0.0;
  int n_max = 0;
  uint64_t seed = 0;
  std::string exit_reason;
  double final_delta = 0.0;
  std::string checkpoint;  // file name, relative to the manifest directory
  std::string role;        // "training" | "held-out"
  ReducedModel model;
};

struct Ensemble {
  std::vector<EnsembleMember> members;
  int held_out = 0;

  std::vector<int> training_ids() const;
  std::vector<int> held_out_ids() const;
};

struct EnsembleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Retrains one model per config (sequentially, each from the same stage-1
// parent), writes a checkpoint per member plus `ensemble.json` into out_dir.
// A failing config aborts with EnsembleError naming the member.
Ensemble build_ensemble(const ReducedModel& stage1, const sim::EpisodeDataset& hist,
                        const EnsembleSpec& spec, const StoppingSet& set,
                        const std::string& out_dir);

void save_manifest(const Ensemble& e, const std::string& path);

// Reads a manifest written by build_ensemble and loads every checkpoint.
Ensemble load_ensemble(const std::string& manifest_path);

}  // namespace rmc::sysid
