#include "rmc/sysid/reduced_model.hpp"

#include <cmath>

#include "rmc/core/checkpoint.hpp"

namespace rmc::sysid {

using core::require;

Normalizer Normalizer::identity(int width) {
  Normalizer nz;
  nz.mean.assign(width, 0.0);
  nz.scale.assign(width, 1.0);
  return nz;
}

Normalizer Normalizer::fit(const sim::EpisodeDataset& ds) {
  ds.validate();
  const int d = ds.d_total();
  const int t_count = ds.steps();
  require(t_count > 1, "normalizer: need at least two steps");
  Normalizer nz;
  nz.mean.assign(d, 0.0);
  nz.scale.assign(d, 0.0);
  Vec x(d);
  for (int t = 0; t < t_count; ++t) {
    ds.fill_x(t, x);
    for (int j = 0; j < d; ++j) nz.mean[j] += x[j];
  }
  for (int j = 0; j < d; ++j) nz.mean[j] /= t_count;
  for (int t = 0; t < t_count; ++t) {
    ds.fill_x(t, x);
    for (int j = 0; j < d; ++j) {
      const double c = x[j] - nz.mean[j];
      nz.scale[j] += c * c;
    }
  }
  for (int j = 0; j < d; ++j) {
    const double sd = std::sqrt(nz.scale[j] / (t_count - 1));
    nz.scale[j] = sd > 1e-8 ? sd : 1.0;  // constant channels pass through
  }
  return nz;
}

void ReducedModel::validate() const {
  net.validate();
  require(d_cmd >= 0 && d_ext >= 0 && d_obs > 0, "reduced model: bad dimension record");
  require(net.enc.input_dim == d(), "reduced model: encoder width != d");
  require(net.dec.input_dim == d_sharp(), "reduced model: decoder width != d_sharp");
  require(net.head.out_dim() == d_obs, "reduced model: head width != d_obs");
  require(norm.width() == d(), "reduced model: normalizer width != d");
  require(n >= 1 && l >= 1, "reduced model: window lengths must be >= 1");
}

std::pair<Vec, Vec> ReducedModel::encode(const Mat& window) const {
  validate();
  require(window.cols == d(), "encode: window width mismatch");
  require(window.rows == n, "encode: window length != n");
  core::LstmState s(net.enc.hidden);
  Vec zbuf(static_cast<size_t>(4) * net.enc.hidden);
  Vec x(d());
  for (int t = 0; t < window.rows; ++t) {
    for (int j = 0; j < d(); ++j) x[j] = norm.fwd(j, window(t, j));
    core::lstm_step(net.enc, x, s, zbuf);
  }
  return {std::move(s.c), std::move(s.h)};
}

Mat ReducedModel::decode(const Vec& c, const Vec& h, const Mat& inputs) const {
  validate();
  require(static_cast<int>(c.size()) == net.enc.hidden &&
              static_cast<int>(h.size()) == net.enc.hidden,
          "decode: state size mismatch");
  require(inputs.cols == d_sharp(), "decode: input width mismatch");
  core::LstmState s(net.dec.hidden);
  s.c = c;
  s.h = h;
  Vec zbuf(static_cast<size_t>(4) * net.dec.hidden);
  Vec x(d_sharp()), o;
  Mat out(inputs.rows, d_obs);
  for (int t = 0; t < inputs.rows; ++t) {
    for (int j = 0; j < d_sharp(); ++j) x[j] = norm.fwd(j, inputs(t, j));
    core::lstm_step(net.dec, x, s, zbuf);
    core::mlp_forward(net.head, s.h, o);
    for (int j = 0; j < d_obs; ++j) out(t, j) = norm.inv(d_sharp() + j, o[j]);
  }
  return out;
}

Mat ReducedModel::predict_segment(const sim::EpisodeDataset& ds, int t0, int horizon) const {
  require(ds.d_cmd() == d_cmd && ds.d_ext() == d_ext && ds.d_obs() == d_obs,
          "predict_segment: dataset layout mismatch");
  require(t0 >= 0 && t0 + n + horizon <= ds.steps(), "predict_segment: window out of range");
  Mat window(n, d());
  for (int t = 0; t < n; ++t) {
    auto row = window.row(t);
    ds.fill_x(t0 + t, row);
  }
  auto [c, h] = encode(window);
  Mat inputs(horizon, d_sharp());
  for (int t = 0; t < horizon; ++t) {
    auto row = inputs.row(t);
    ds.fill_x_sharp(t0 + n + t, row);
  }
  return decode(c, h, inputs);
}

ReducedModel make_reduced_model(int d_cmd, int d_ext, int d_obs, int hidden,
                                const std::vector<int>& head_hidden, int n, int l,
                                core::Rng& g) {
  ReducedModel m;
  m.d_cmd = d_cmd;
  m.d_ext = d_ext;
  m.d_obs = d_obs;
  m.n = n;
  m.l = l;
  m.net.enc = core::Lstm::zeros(m.d(), hidden);
  m.net.dec = core::Lstm::zeros(m.d_sharp(), hidden);
  std::vector<int> sizes{hidden};
  sizes.insert(sizes.end(), head_hidden.begin(), head_hidden.end());
  sizes.push_back(d_obs);
  m.net.head = core::Mlp::zeros(sizes);
  m.net.enc.init(g);
  m.net.dec.init(g);
  m.net.head.init(g);
  m.norm = Normalizer::identity(m.d());
  m.validate();
  return m;
}

namespace {

core::ParamBlock block(const std::string& name, std::vector<uint64_t> dims, Vec data) {
  core::ParamBlock b;
  b.name = name;
  b.dims = std::move(dims);
  b.data = std::move(data);
  return b;
}

}  // namespace

void save_reduced_model(const ReducedModel& m, const std::string& path) {
  m.validate();
  std::vector<core::ParamBlock> blocks;
  blocks.push_back(block("meta",
                         {6},
                         {static_cast<double>(m.d_cmd), static_cast<double>(m.d_ext),
                          static_cast<double>(m.d_obs), static_cast<double>(m.n),
                          static_cast<double>(m.l), static_cast<double>(m.net.enc.hidden)}));
  blocks.push_back(block("enc.w",
                         {static_cast<uint64_t>(m.net.enc.w.rows),
                          static_cast<uint64_t>(m.net.enc.w.cols)},
                         m.net.enc.w.a));
  blocks.push_back(block("enc.b", {m.net.enc.b.size()}, m.net.enc.b));
  blocks.push_back(block("dec.w",
                         {static_cast<uint64_t>(m.net.dec.w.rows),
                          static_cast<uint64_t>(m.net.dec.w.cols)},
                         m.net.dec.w.a));
  blocks.push_back(block("dec.b", {m.net.dec.b.size()}, m.net.dec.b));
  for (size_t k = 0; k < m.net.head.w.size(); ++k) {
    const std::string id = std::to_string(k);
    blocks.push_back(block("head.w" + id,
                           {static_cast<uint64_t>(m.net.head.w[k].rows),
                            static_cast<uint64_t>(m.net.head.w[k].cols)},
                           m.net.head.w[k].a));
    blocks.push_back(block("head.b" + id, {m.net.head.b[k].size()}, m.net.head.b[k]));
  }
  blocks.push_back(block("norm.mean", {m.norm.mean.size()}, m.norm.mean));
  blocks.push_back(block("norm.scale", {m.norm.scale.size()}, m.norm.scale));
  core::save_checkpoint(path, blocks);
}

ReducedModel load_reduced_model(const std::string& path) {
  auto blocks = core::load_checkpoint(path);
  const auto& meta = core::find_block(blocks, "meta").data;
  require(meta.size() == 6, "reduced model: malformed meta block");
  ReducedModel m;
  m.d_cmd = static_cast<int>(meta[0]);
  m.d_ext = static_cast<int>(meta[1]);
  m.d_obs = static_cast<int>(meta[2]);
  m.n = static_cast<int>(meta[3]);
  m.l = static_cast<int>(meta[4]);
  const int hidden = static_cast<int>(meta[5]);

  auto load_lstm = [&](const std::string& prefix, int input_dim) {
    core::Lstm cell = core::Lstm::zeros(input_dim, hidden);
    const auto& w = core::find_block(blocks, prefix + ".w");
    const auto& b = core::find_block(blocks, prefix + ".b");
    require(w.data.size() == cell.w.size() && b.data.size() == cell.b.size(),
            "reduced model: " + prefix + " shape mismatch");
    cell.w.a = w.data;
    cell.b = b.data;
    return cell;
  };
  m.net.enc = load_lstm("enc", m.d());
  m.net.dec = load_lstm("dec", m.d_sharp());

  std::vector<int> sizes{hidden};
  for (size_t k = 0;; ++k) {
    bool found = false;
    for (const auto& b : blocks)
      if (b.name == "head.w" + std::to_string(k)) {
        sizes.push_back(static_cast<int>(b.dims.at(0)));
        found = true;
        break;
      }
    if (!found) break;
  }
  require(sizes.size() >= 2, "reduced model: head blocks missing");
  m.net.head = core::Mlp::zeros(sizes);
  for (size_t k = 0; k + 1 < sizes.size(); ++k) {
    const std::string id = std::to_string(k);
    m.net.head.w[k].a = core::find_block(blocks, "head.w" + id).data;
    m.net.head.b[k] = core::find_block(blocks, "head.b" + id).data;
  }
  m.norm.mean = core::find_block(blocks, "norm.mean").data;
  m.norm.scale = core::find_block(blocks, "norm.scale").data;
  m.validate();
  return m;
}

core::SeqSample make_sample(const sim::EpisodeDataset& ds, const Normalizer& norm, int start,
                            int n_b, int l_b) {
  require(n_b >= 1 && l_b >= 1, "make_sample: window lengths must be >= 1");
  require(start >= 0 && start + n_b + l_b <= ds.steps(), "make_sample: window out of range");
  const int d = ds.d_total();
  const int ds_sharp = ds.d_sharp();
  require(norm.width() == d, "make_sample: normalizer width mismatch");

  core::SeqSample s;
  s.enc_x = Mat(n_b, d);
  s.dec_x = Mat(l_b, ds_sharp);
  s.target = Mat(l_b, ds.d_obs());
  Vec x(d);
  for (int t = 0; t < n_b; ++t) {
    ds.fill_x(start + t, x);
    for (int j = 0; j < d; ++j) s.enc_x(t, j) = norm.fwd(j, x[j]);
  }
  Vec xs(ds_sharp);
  for (int t = 0; t < l_b; ++t) {
    const int row = start + n_b + t;
    ds.fill_x_sharp(row, xs);
    for (int j = 0; j < ds_sharp; ++j) s.dec_x(t, j) = norm.fwd(j, xs[j]);
    for (int j = 0; j < ds.d_obs(); ++j)
      s.target(t, j) = norm.fwd(ds_sharp + j, ds.obs(row, j));
  }
  return s;
}

}  // namespace rmc::sysid
