#include "rmc/sysid/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <utility>

#include "rmc/core/encdec.hpp"
#include "rmc/core/optim.hpp"

namespace rmc::sysid {

using core::require;

void TrainConfig::validate() const {
  require(iterations >= 0, "train: iterations must be >= 0");
  require(batch >= 1, "train: batch must be >= 1");
  require(lr > 0.0 && clip_norm > 0.0, "train: lr and clip_norm must be positive");
  require(encode_jitter >= 0.0 && encode_jitter < 1.0, "train: jitter must be in [0, 1)");
  require(log_every >= 1, "train: log_every must be >= 1");
  require(val_windows >= 1, "train: val_windows must be >= 1");
}

namespace {

// Validation slice: disjoint fixed-shape windows at the dataset tail.
std::vector<core::SeqSample> val_samples(const ReducedModel& m, const sim::EpisodeDataset& ds,
                                         int count, int train_end) {
  std::vector<core::SeqSample> out;
  const int stride = m.n + m.l;
  for (int k = 0; k < count; ++k)
    out.push_back(make_sample(ds, m.norm, train_end + k * stride, m.n, m.l));
  return out;
}

double eval_loss(const ReducedModel& m, const std::vector<core::SeqSample>& samples) {
  double acc = 0.0;
  for (const auto& s : samples) {
    const Mat pred = core::encdec_forward(m.net, s.enc_x, s.dec_x);
    acc += core::sequence_loss(core::LossKind::squared, pred, s.target);
  }
  return acc / samples.size();
}

}  // namespace

TrainResult train_stage1(ReducedModel& model, const sim::EpisodeDataset& data,
                         const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  data.validate();
  require(data.d_cmd() == model.d_cmd && data.d_ext() == model.d_ext &&
              data.d_obs() == model.d_obs,
          "train: dataset layout mismatch");

  const int n_hi = std::max(1, static_cast<int>(std::floor((1.0 + cfg.encode_jitter) * model.n)));
  const int n_lo = std::max(1, static_cast<int>(std::ceil((1.0 - cfg.encode_jitter) * model.n)));
  const int l_hi = std::max(1, 2 * model.l);
  const int l_lo = std::max(1, model.l / 4);
  const int train_end = data.steps() - cfg.val_windows * (model.n + model.l);
  require(train_end >= n_hi + l_hi,
          "train: dataset too short for the validation slice plus one max-length window");

  model.norm = Normalizer::fit(data);

  core::Rng g(core::derive_seed(cfg.seed, "stage1"));
  core::EncDecNet grads = model.net.zeros_like();
  core::AdamState adam(model.net.param_count());
  auto ws = core::make_workspace();
  const auto vals = val_samples(model, data, cfg.val_windows, train_end);

  TrainResult res;
  std::vector<core::SeqSample> batch(cfg.batch);
  for (int it = 0; it < cfg.iterations; ++it) {
    const int n_b = core::uniform_int(g, n_lo, n_hi);
    const double log_l = core::uniform(g, std::log(static_cast<double>(l_lo)),
                                       std::log(static_cast<double>(l_hi)));
    const int l_b = std::clamp(static_cast<int>(std::lround(std::exp(log_l))), l_lo, l_hi);
    const int last_start = train_end - (n_b + l_b);
    for (int k = 0; k < cfg.batch; ++k)
      batch[k] = make_sample(data, model.norm, core::uniform_int(g, 0, last_start), n_b, l_b);

    double loss;
    try {
      loss = core::batch_gradients(model.net, batch, core::LossKind::squared, grads, *ws);
    } catch (const core::NumericError& e) {
      throw core::NumericError("stage-1 iteration " + std::to_string(it) + ": " + e.what());
    }
    if (!std::isfinite(loss))
      throw core::NumericError("stage-1 iteration " + std::to_string(it) + ": non-finite loss");
    core::clip_grad_norm(grads.param_spans(), cfg.clip_norm);
    core::adam_update(adam, model.net.param_spans(), std::as_const(grads).param_spans(), cfg.lr);

    if ((it + 1) % cfg.log_every == 0 || it + 1 == cfg.iterations) {
      res.log.push_back({it + 1, loss, eval_loss(model, vals)});
    } else {
      res.log.push_back({it + 1, loss, std::numeric_limits<double>::quiet_NaN()});
    }
  }
  res.final_val_loss = eval_loss(model, vals);
  return res;
}

void save_train_log(const TrainResult& r, const std::string& path) {
  std::ofstream f(path);
  require(f.good(), "train log: cannot open " + path);
  f << "iteration,train_loss,val_loss\n";
  char buf[96];
  for (const auto& row : r.log) {
    if (std::isnan(row.val_loss))
      std::snprintf(buf, sizeof buf, "%d,%.17g,\n", row.iteration, row.train_loss);
    else
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", row.iteration, row.train_loss,
                    row.val_loss);
    f << buf;
  }
}

}  // namespace rmc::sysid
