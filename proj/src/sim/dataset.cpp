#include "rmc/sim/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rmc::sim {

using core::require;

void EpisodeDataset::validate() const {
  const int t = obs.rows;
  require(cmd.rows == t && ext.rows == t, "dataset: misaligned column groups");
  require(static_cast<int>(cmd_names.size()) == cmd.cols, "dataset: command names mismatch");
  require(static_cast<int>(ext_names.size()) == ext.cols, "dataset: exogenous names mismatch");
  require(static_cast<int>(obs_names.size()) == obs.cols, "dataset: observation names mismatch");
  require(dt > 0.0, "dataset: nonpositive dt");
}

void EpisodeDataset::fill_x(int t, std::span<double> out) const {
  require(static_cast<int>(out.size()) == d_total(), "fill_x: bad output size");
  double* o = out.data();
  if (cmd.cols) o = std::copy(cmd.row(t).begin(), cmd.row(t).end(), o);
  if (ext.cols) o = std::copy(ext.row(t).begin(), ext.row(t).end(), o);
  std::copy(obs.row(t).begin(), obs.row(t).end(), o);
}

void EpisodeDataset::fill_x_sharp(int t, std::span<double> out) const {
  require(static_cast<int>(out.size()) == d_sharp(), "fill_x_sharp: bad output size");
  double* o = out.data();
  if (cmd.cols) o = std::copy(cmd.row(t).begin(), cmd.row(t).end(), o);
  if (ext.cols) std::copy(ext.row(t).begin(), ext.row(t).end(), o);
}

namespace {

void append_value(std::string& line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += ',';
  line += buf;
}

}  // namespace

void save_dataset(const EpisodeDataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("dataset: cannot open for write: " + path);

  std::string header = "t";
  for (const auto& n : ds.cmd_names) header += ",cmd_" + n;
  for (const auto& n : ds.ext_names) header += ",ext_" + n;
  for (const auto& n : ds.obs_names) header += ",obs_" + n;
  os << header << '\n';

  std::string line;
  for (int t = 0; t < ds.steps(); ++t) {
    line = std::to_string(t);
    for (int j = 0; j < ds.cmd.cols; ++j) append_value(line, ds.cmd(t, j));
    for (int j = 0; j < ds.ext.cols; ++j) append_value(line, ds.ext(t, j));
    for (int j = 0; j < ds.obs.cols; ++j) append_value(line, ds.obs(t, j));
    os << line << '\n';
  }
  if (!os) throw std::runtime_error("dataset: write failed: " + path);

  nlohmann::json meta;
  meta["dt_seconds"] = ds.dt;
  meta["rows"] = ds.steps();
  meta["d_cmd"] = ds.d_cmd();
  meta["d_ext"] = ds.d_ext();
  meta["d_obs"] = ds.d_obs();
  meta["cmd_names"] = ds.cmd_names;
  meta["ext_names"] = ds.ext_names;
  meta["obs_names"] = ds.obs_names;
  meta["seed"] = ds.seed;
  meta["generator"] = ds.generator;
  std::ofstream ms(path + ".meta.json", std::ios::trunc);
  ms << meta.dump(2) << '\n';
  if (!ms) throw std::runtime_error("dataset: metadata write failed: " + path);
}

EpisodeDataset load_dataset(const std::string& path) {
  std::ifstream ms(path + ".meta.json");
  if (!ms) throw std::runtime_error("dataset: missing metadata: " + path + ".meta.json");
  nlohmann::json meta = nlohmann::json::parse(ms);

  EpisodeDataset ds;
  ds.dt = meta.at("dt_seconds").get<double>();
  ds.seed = meta.at("seed").get<uint64_t>();
  ds.generator = meta.value("generator", "");
  ds.cmd_names = meta.at("cmd_names").get<std::vector<std::string>>();
  ds.ext_names = meta.at("ext_names").get<std::vector<std::string>>();
  ds.obs_names = meta.at("obs_names").get<std::vector<std::string>>();
  const int rows = meta.at("rows").get<int>();
  const int dc = meta.at("d_cmd").get<int>();
  const int de = meta.at("d_ext").get<int>();
  const int dobs = meta.at("d_obs").get<int>();
  require(static_cast<int>(ds.cmd_names.size()) == dc &&
              static_cast<int>(ds.ext_names.size()) == de &&
              static_cast<int>(ds.obs_names.size()) == dobs,
          "dataset: metadata name/dimension mismatch");
  ds.cmd = Mat(rows, dc);
  ds.ext = Mat(rows, de);
  ds.obs = Mat(rows, dobs);

  std::ifstream is(path);
  if (!is) throw std::runtime_error("dataset: cannot open: " + path);
  std::string line;
  std::getline(is, line);  // header; the sidecar is authoritative for layout
  int t = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (t >= rows) throw std::runtime_error("dataset: more rows than metadata declares");
    const char* s = line.c_str();
    char* end = nullptr;
    std::strtol(s, &end, 10);  // step index column
    s = end;
    auto next = [&]() {
      if (*s != ',') throw std::runtime_error("dataset: malformed row in " + path);
      ++s;
      const double v = std::strtod(s, &end);
      if (end == s) throw std::runtime_error("dataset: malformed number in " + path);
      s = end;
      return v;
    };
    for (int j = 0; j < dc; ++j) ds.cmd(t, j) = next();
    for (int j = 0; j < de; ++j) ds.ext(t, j) = next();
    for (int j = 0; j < dobs; ++j) ds.obs(t, j) = next();
    ++t;
  }
  require(t == rows, "dataset: fewer rows than metadata declares");
  ds.validate();
  return ds;
}

}  // namespace rmc::sim
