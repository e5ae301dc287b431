#include "rmc/sysid/ensemble.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace rmc::sysid {

using core::require;
namespace fs = std::filesystem;

void EnsembleSpec::validate() const {
  const int n = static_cast<int>(configs.size());
  require(n >= 2, "ensemble: need at least two configs");
  require(held_out >= 1 && held_out < n, "ensemble: held-out count must be in [1, N)");
  for (const auto& c : configs) c.validate();
}

std::vector<int> Ensemble::training_ids() const {
  std::vector<int> ids;
  for (int i = 0; i < static_cast<int>(members.size()) - held_out; ++i) ids.push_back(i);
  return ids;
}

std::vector<int> Ensemble::held_out_ids() const {
  std::vector<int> ids;
  for (int i = static_cast<int>(members.size()) - held_out;
       i < static_cast<int>(members.size()); ++i)
    ids.push_back(i);
  return ids;
}

Ensemble build_ensemble(const ReducedModel& stage1, const sim::EpisodeDataset& hist,
                        const EnsembleSpec& spec, const StoppingSet& set,
                        const std::string& out_dir) {
  spec.validate();
  fs::create_directories(out_dir);

  Ensemble e;
  e.held_out = spec.held_out;
  const int n = static_cast<int>(spec.configs.size());
  for (int i = 0; i < n; ++i) {
    const auto& cfg = spec.configs[i];
    char id[16];
    std::snprintf(id, sizeof id, "m%02d", i);
    EnsembleMember m;
    m.id = id;
    m.algorithm = cfg.algorithm;
    m.delta_max = cfg.delta_max;
    m.n_max = cfg.n_max;
    m.seed = cfg.seed;
    m.role = i < n - spec.held_out ? "training" : "held-out";
    m.checkpoint = std::string("member_") + id + ".rmc";
    try {
      auto [model, trace] = cfg.algorithm == RetrainAlgo::full
                                ? retrain_full(stage1, hist, cfg, set)
                                : retrain_fine(stage1, hist, cfg, set);
      m.exit_reason = trace.exit_reason;
      m.final_delta = trace.final_delta;
      m.model = std::move(model);
    } catch (const std::exception& ex) {
      throw EnsembleError(std::string("ensemble member ") + id + " failed: " + ex.what());
    }
    save_reduced_model(m.model, (fs::path(out_dir) / m.checkpoint).string());
    e.members.push_back(std::move(m));
  }
  save_manifest(e, (fs::path(out_dir) / "ensemble.json").string());
  return e;
}

void save_manifest(const Ensemble& e, const std::string& path) {
  nlohmann::json j;
  j["held_out"] = e.held_out;
  j["members"] = nlohmann::json::array();
  for (const auto& m : e.members) {
    nlohmann::json jm;
    jm["id"] = m.id;
    jm["algorithm"] = m.algorithm == RetrainAlgo::full ? "full" : "fine";
    jm["delta_max"] = m.delta_max;
    jm["n_max"] = m.n_max;
    jm["seed"] = m.seed;
    jm["exit_reason"] = m.exit_reason;
    jm["final_delta"] = m.final_delta;
    jm["checkpoint"] = m.checkpoint;
    jm["role"] = m.role;
    j["members"].push_back(jm);
  }
  std::ofstream f(path);
  require(f.good(), "ensemble: cannot open " + path);
  f << j.dump(2) << "\n";
}

Ensemble load_ensemble(const std::string& manifest_path) {
  std::ifstream f(manifest_path);
  require(f.good(), "ensemble: cannot open " + manifest_path);
  nlohmann::json j;
  f >> j;

  Ensemble e;
  e.held_out = j.at("held_out").get<int>();
  const fs::path dir = fs::path(manifest_path).parent_path();
  for (const auto& jm : j.at("members")) {
    EnsembleMember m;
    m.id = jm.at("id").get<std::string>();
    m.algorithm =
        jm.at("algorithm").get<std::string>() == "full" ? RetrainAlgo::full : RetrainAlgo::fine;
    m.delta_max = jm.at("delta_max").get<double>();
    m.n_max = jm.at("n_max").get<int>();
    m.seed = jm.at("seed").get<uint64_t>();
    m.exit_reason = jm.at("exit_reason").get<std::string>();
    m.final_delta = jm.at("final_delta").get<double>();
    m.checkpoint = jm.at("checkpoint").get<std::string>();
    m.role = jm.at("role").get<std::string>();
    m.model = load_reduced_model((dir / m.checkpoint).string());
    e.members.push_back(std::move(m));
  }
  require(e.held_out >= 1 && e.held_out < static_cast<int>(e.members.size()),
          "ensemble: manifest held-out count out of range");
  return e;
}

}  // namespace rmc::sysid
