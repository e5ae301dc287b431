#include "rmc/core/encdec.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace rmc::core {

void EncDecNet::validate() const {
  require(enc.hidden > 0 && dec.hidden > 0, "encdec: uninitialized cells");
  require(enc.hidden == dec.hidden, "encdec: decoder state must match encoder state size");
  require(head.in_dim() == dec.hidden, "encdec: head input must match hidden size");
  require(head.out_dim() > 0, "encdec: head has no output");
}

ParamSpans EncDecNet::param_spans() {
  ParamSpans s;
  s.emplace_back(enc.w.a);
  s.emplace_back(enc.b);
  s.emplace_back(dec.w.a);
  s.emplace_back(dec.b);
  for (size_t k = 0; k < head.w.size(); ++k) {
    s.emplace_back(head.w[k].a);
    s.emplace_back(head.b[k]);
  }
  return s;
}

GradSpans EncDecNet::param_spans() const {
  GradSpans s;
  s.emplace_back(enc.w.a);
  s.emplace_back(enc.b);
  s.emplace_back(dec.w.a);
  s.emplace_back(dec.b);
  for (size_t k = 0; k < head.w.size(); ++k) {
    s.emplace_back(head.w[k].a);
    s.emplace_back(head.b[k]);
  }
  return s;
}

size_t EncDecNet::param_count() const {
  return enc.param_count() + dec.param_count() + head.param_count();
}

EncDecNet EncDecNet::zeros_like() const {
  EncDecNet z;
  z.enc = Lstm::zeros(enc.input_dim, enc.hidden);
  z.dec = Lstm::zeros(dec.input_dim, dec.hidden);
  std::vector<int> sizes{head.in_dim()};
  for (const auto& wk : head.w) sizes.push_back(wk.rows);
  z.head = Mlp::zeros(sizes);
  return z;
}

void EncDecNet::fill(double v) {
  enc.w.fill(v);
  enc.b.assign(enc.b.size(), v);
  dec.w.fill(v);
  dec.b.assign(dec.b.size(), v);
  for (size_t k = 0; k < head.w.size(); ++k) {
    head.w[k].fill(v);
    head.b[k].assign(head.b[k].size(), v);
  }
}

Mat encdec_forward(const EncDecNet& net, const Mat& enc_x, const Mat& dec_x) {
  net.validate();
  require(enc_x.rows >= 1 && dec_x.rows >= 1, "encdec_forward: empty window");
  require(enc_x.cols == net.enc.input_dim, "encdec_forward: encoder input width mismatch");
  require(dec_x.cols == net.dec.input_dim, "encdec_forward: decoder input width mismatch");

  const int p = net.enc.hidden;
  LstmState s(p);
  Vec zbuf(static_cast<size_t>(4) * p);
  for (int t = 0; t < enc_x.rows; ++t) lstm_step(net.enc, enc_x.row(t), s, zbuf);

  Mat out(dec_x.rows, net.head.out_dim());
  Vec o;
  for (int t = 0; t < dec_x.rows; ++t) {
    lstm_step(net.dec, dec_x.row(t), s, zbuf);
    mlp_forward(net.head, s.h, o);
    std::copy(o.begin(), o.end(), out.row(t).begin());
  }
  return out;
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Per-step quantities of one unrolled LSTM pass, kept for backpropagation.
struct LstmTrace {
  Vec c0;     // cell state before step 0
  Mat u;      // T x (d + p): gate inputs [x_t, h_{t-1}]
  Mat gates;  // T x 4p: i, f, g, o after their nonlinearities
  Mat c;      // T x p: cell state after each step
  Mat tau;    // T x p: tanh(c)
  Mat h;      // T x p

  void reshape(int T, int d, int p) {
    c0.assign(p, 0.0);
    u.reshape(T, d + p);
    gates.reshape(T, 4 * p);
    c.reshape(T, p);
    tau.reshape(T, p);
    h.reshape(T, p);
  }
};

struct SeqScratch {
  LstmTrace enc, dec;
  std::vector<Mat> head_act;  // head_act[0] = decoder h, head_act[k] = layer k-1 output
  Mat out;
  Vec zbuf, dz, du, dh, dc, ds, da, mlp_tmp;
};

// Runs one cached step; `prev_h` is the hidden state entering the step.
void lstm_step_cached(const Lstm& cell, std::span<const double> x, std::span<const double> prev_h,
                      std::span<const double> prev_c, LstmTrace& tr, int t, Vec& zbuf) {
  const int p = cell.hidden;
  const int d = cell.input_dim;
  const int q = d + p;
  auto u = tr.u.row(t);
  std::copy(x.begin(), x.end(), u.begin());
  std::copy(prev_h.begin(), prev_h.end(), u.begin() + d);
  for (int r = 0; r < 4 * p; ++r) {
    const double* wr = cell.w.a.data() + static_cast<size_t>(r) * q;
    double acc = cell.b[r];
    for (int j = 0; j < q; ++j) acc += wr[j] * u[j];
    zbuf[r] = acc;
  }
  auto g = tr.gates.row(t);
  auto cr = tr.c.row(t);
  auto taur = tr.tau.row(t);
  auto hr = tr.h.row(t);
  for (int j = 0; j < p; ++j) {
    const double gi = sigmoid(zbuf[j]);
    const double gf = sigmoid(zbuf[p + j]);
    const double gg = std::tanh(zbuf[2 * p + j]);
    const double go = sigmoid(zbuf[3 * p + j]);
    g[j] = gi;
    g[p + j] = gf;
    g[2 * p + j] = gg;
    g[3 * p + j] = go;
    cr[j] = gf * prev_c[j] + gi * gg;
    taur[j] = std::tanh(cr[j]);
    hr[j] = go * taur[j];
  }
}

// Backward through step t. On entry dc/dh hold gradients wrt c_t/h_t; on exit
// they hold gradients wrt c_{t-1}/h_{t-1}. Parameter gradients accumulate.
void lstm_step_backward(const Lstm& cell, const LstmTrace& tr, int t, Vec& dc, Vec& dh,
                        Mat& gw, Vec& gb, Vec& dz, Vec& du) {
  const int p = cell.hidden;
  const int d = cell.input_dim;
  const int q = d + p;
  auto g = tr.gates.row(t);
  auto taur = tr.tau.row(t);
  std::span<const double> c_prev = t > 0 ? tr.c.row(t - 1) : std::span<const double>(tr.c0);
  for (int j = 0; j < p; ++j) {
    const double gi = g[j], gf = g[p + j], gg = g[2 * p + j], go = g[3 * p + j];
    const double tj = taur[j];
    const double do_ = dh[j] * tj;
    const double dcj = dc[j] + dh[j] * go * (1.0 - tj * tj);
    const double di = dcj * gg;
    const double dgg = dcj * gi;
    const double df = dcj * c_prev[j];
    dc[j] = dcj * gf;
    dz[j] = di * gi * (1.0 - gi);
    dz[p + j] = df * gf * (1.0 - gf);
    dz[2 * p + j] = dgg * (1.0 - gg * gg);
    dz[3 * p + j] = do_ * go * (1.0 - go);
  }
  auto u = tr.u.row(t);
  std::fill(du.begin(), du.end(), 0.0);
  for (int r = 0; r < 4 * p; ++r) {
    const double dzr = dz[r];
    const double* wr = cell.w.a.data() + static_cast<size_t>(r) * q;
    double* gwr = gw.a.data() + static_cast<size_t>(r) * q;
    for (int j = 0; j < q; ++j) {
      gwr[j] += dzr * u[j];
      du[j] += dzr * wr[j];
    }
    gb[r] += dzr;
  }
  std::copy(du.begin() + d, du.end(), dh.begin());
}

// Forward pass with caches. Returns the per-sequence mean-entry loss.
double forward_cached(const EncDecNet& net, const SeqSample& s, LossKind kind, SeqScratch& ws) {
  const int p = net.enc.hidden;
  const int n = s.enc_x.rows;
  const int l = s.dec_x.rows;
  const int d_obs = net.head.out_dim();
  require(n >= 1 && l >= 1, "backprop: empty window");
  require(s.enc_x.cols == net.enc.input_dim, "backprop: encoder input width mismatch");
  require(s.dec_x.cols == net.dec.input_dim, "backprop: decoder input width mismatch");
  require(s.target.rows == l && s.target.cols == d_obs, "backprop: target shape mismatch");

  ws.enc.reshape(n, net.enc.input_dim, p);
  ws.dec.reshape(l, net.dec.input_dim, p);
  ws.out.reshape(l, d_obs);
  ws.zbuf.assign(static_cast<size_t>(4) * p, 0.0);

  const int layers = net.head.layers();
  ws.head_act.resize(layers + 1);
  ws.head_act[0].reshape(l, p);
  for (int k = 0; k < layers; ++k) ws.head_act[k + 1].reshape(l, net.head.w[k].rows);

  const Vec zero_p(p, 0.0);
  for (int t = 0; t < n; ++t) {
    std::span<const double> ph = t > 0 ? ws.enc.h.row(t - 1) : std::span<const double>(zero_p);
    std::span<const double> pc = t > 0 ? ws.enc.c.row(t - 1) : std::span<const double>(zero_p);
    lstm_step_cached(net.enc, s.enc_x.row(t), ph, pc, ws.enc, t, ws.zbuf);
  }

  // Decoder starts from the encoder's final state.
  std::copy(ws.enc.c.row(n - 1).begin(), ws.enc.c.row(n - 1).end(), ws.dec.c0.begin());

  double loss = 0.0;
  for (int t = 0; t < l; ++t) {
    std::span<const double> ph = t > 0 ? ws.dec.h.row(t - 1) : ws.enc.h.row(n - 1);
    std::span<const double> pc = t > 0 ? ws.dec.c.row(t - 1) : std::span<const double>(ws.dec.c0);
    lstm_step_cached(net.dec, s.dec_x.row(t), ph, pc, ws.dec, t, ws.zbuf);

    auto hrow = ws.dec.h.row(t);
    std::copy(hrow.begin(), hrow.end(), ws.head_act[0].row(t).begin());
    for (int k = 0; k < layers; ++k) {
      const Mat& wk = net.head.w[k];
      auto in = ws.head_act[k].row(t);
      auto outr = ws.head_act[k + 1].row(t);
      for (int r = 0; r < wk.rows; ++r) {
        const double* wr = wk.a.data() + static_cast<size_t>(r) * wk.cols;
        double acc = net.head.b[k][r];
        for (int j = 0; j < wk.cols; ++j) acc += wr[j] * in[j];
        outr[r] = (k < layers - 1 && acc < 0.0) ? 0.0 : acc;
      }
    }
    auto orow = ws.head_act[layers].row(t);
    std::copy(orow.begin(), orow.end(), ws.out.row(t).begin());
    double step_acc = 0.0;
    for (int j = 0; j < d_obs; ++j) {
      const double diff = orow[j] - s.target(t, j);
      step_acc += kind == LossKind::squared ? diff * diff : std::fabs(diff);
    }
    if (!std::isfinite(step_acc))
      throw NumericError("non-finite output at decode step " + std::to_string(t));
    loss += step_acc;
  }
  return loss / (static_cast<double>(l) * d_obs);
}

// Backward pass from the caches; accumulates the gradient of the
// per-sequence mean-entry loss into `g`.
void backward_cached(const EncDecNet& net, const SeqSample& s, LossKind kind, SeqScratch& ws,
                     EncDecNet& g) {
  const int p = net.enc.hidden;
  const int n = s.enc_x.rows;
  const int l = s.dec_x.rows;
  const int d_obs = net.head.out_dim();
  const int layers = net.head.layers();
  const double scale = 1.0 / (static_cast<double>(l) * d_obs);

  ws.dh.assign(p, 0.0);
  ws.dc.assign(p, 0.0);
  ws.dz.assign(static_cast<size_t>(4) * p, 0.0);
  ws.du.assign(static_cast<size_t>(std::max(net.enc.input_dim, net.dec.input_dim)) + p, 0.0);

  Vec& ds = ws.ds;
  Vec& da = ws.da;
  for (int t = l - 1; t >= 0; --t) {
    ds.assign(d_obs, 0.0);
    for (int j = 0; j < d_obs; ++j) {
      const double diff = ws.out(t, j) - s.target(t, j);
      ds[j] = kind == LossKind::squared ? 2.0 * diff * scale
                                        : (diff > 0.0 ? scale : (diff < 0.0 ? -scale : 0.0));
    }
    for (int k = layers - 1; k >= 0; --k) {
      const Mat& wk = net.head.w[k];
      auto in = ws.head_act[k].row(t);
      da.assign(wk.cols, 0.0);
      for (int r = 0; r < wk.rows; ++r) {
        const double dsr = ds[r];
        const double* wr = wk.a.data() + static_cast<size_t>(r) * wk.cols;
        double* gwr = g.head.w[k].a.data() + static_cast<size_t>(r) * wk.cols;
        for (int j = 0; j < wk.cols; ++j) {
          gwr[j] += dsr * in[j];
          da[j] += dsr * wr[j];
        }
        g.head.b[k][r] += dsr;
      }
      if (k > 0) {
        ds.assign(wk.cols, 0.0);
        for (int j = 0; j < wk.cols; ++j) ds[j] = in[j] > 0.0 ? da[j] : 0.0;
      }
    }
    for (int j = 0; j < p; ++j) ws.dh[j] += da[j];

    ws.du.assign(static_cast<size_t>(net.dec.input_dim) + p, 0.0);
    lstm_step_backward(net.dec, ws.dec, t, ws.dc, ws.dh, g.dec.w, g.dec.b, ws.dz, ws.du);
  }

  // dc/dh now sit on the encoder's final state.
  for (int t = n - 1; t >= 0; --t) {
    ws.du.assign(static_cast<size_t>(net.enc.input_dim) + p, 0.0);
    lstm_step_backward(net.enc, ws.enc, t, ws.dc, ws.dh, g.enc.w, g.enc.b, ws.dz, ws.du);
  }
}

struct ChunkSlot {
  SeqScratch scratch;
  EncDecNet grads;
  double loss = 0.0;
  bool shaped = false;
  std::string error;
};

}  // namespace

struct BatchWorkspace {
  std::vector<ChunkSlot> slots;
  size_t shape_sig = 0;
};

void WorkspaceDeleter::operator()(BatchWorkspace* p) const { delete p; }

WorkspacePtr make_workspace() { return WorkspacePtr(new BatchWorkspace); }

namespace {

size_t net_signature(const EncDecNet& net) {
  size_t h = 1469598103934665603ULL;
  auto mix = [&h](size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  mix(net.enc.input_dim);
  mix(net.enc.hidden);
  mix(net.dec.input_dim);
  for (const auto& wk : net.head.w) mix(wk.rows);
  return h;
}

void add_scaled(EncDecNet& dst, const EncDecNet& src, double scale) {
  auto d = dst.param_spans();
  auto s = src.param_spans();
  for (size_t k = 0; k < d.size(); ++k)
    for (size_t j = 0; j < d[k].size(); ++j) d[k][j] += scale * s[k][j];
}

}  // namespace

double batch_gradients(const EncDecNet& net, std::span<const SeqSample> batch, LossKind kind,
                       EncDecNet& grads, BatchWorkspace& ws, bool parallel) {
  net.validate();
  require(!batch.empty(), "batch_gradients: empty batch");
  const int b = static_cast<int>(batch.size());
  const int chunks = std::min(64, b);

  const size_t sig = net_signature(net);
  if (ws.shape_sig != sig || static_cast<int>(ws.slots.size()) < chunks) {
    ws.slots.resize(chunks);
    for (auto& slot : ws.slots) {
      slot.grads = net.zeros_like();
      slot.shaped = true;
    }
    ws.shape_sig = sig;
  }

#pragma omp parallel for schedule(static) if (parallel)
  for (int c = 0; c < chunks; ++c) {
    ChunkSlot& slot = ws.slots[c];
    slot.grads.fill(0.0);
    slot.loss = 0.0;
    slot.error.clear();
    const int lo = static_cast<int>(static_cast<int64_t>(c) * b / chunks);
    const int hi = static_cast<int>(static_cast<int64_t>(c + 1) * b / chunks);
    try {
      for (int idx = lo; idx < hi; ++idx) {
        slot.loss += forward_cached(net, batch[idx], kind, slot.scratch);
        backward_cached(net, batch[idx], kind, slot.scratch, slot.grads);
      }
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  }

  for (int c = 0; c < chunks; ++c)
    if (!ws.slots[c].error.empty()) throw NumericError(ws.slots[c].error);

  grads = net.zeros_like();
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (int c = 0; c < chunks; ++c) {
    add_scaled(grads, ws.slots[c].grads, inv_b);
    loss += ws.slots[c].loss;
  }
  return loss * inv_b;
}

double batch_gradients_serial(const EncDecNet& net, std::span<const SeqSample> batch,
                              LossKind kind, EncDecNet& grads, BatchWorkspace& ws) {
  net.validate();
  require(!batch.empty(), "batch_gradients_serial: empty batch");
  const size_t sig = net_signature(net);
  if (ws.shape_sig != sig || ws.slots.empty()) {
    ws.slots.resize(1);
    ws.slots[0].grads = net.zeros_like();
    ws.shape_sig = sig;
  }
  ChunkSlot& slot = ws.slots[0];
  grads = net.zeros_like();
  double loss = 0.0;
  for (const SeqSample& s : batch) {
    loss += forward_cached(net, s, kind, slot.scratch);
    backward_cached(net, s, kind, slot.scratch, grads);
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  auto gs = grads.param_spans();
  for (auto& span : gs)
    for (double& v : span) v *= inv_b;
  return loss * inv_b;
}

double backprop_sequence(const EncDecNet& net, const SeqSample& sample, LossKind kind,
                         EncDecNet& grads, BatchWorkspace& ws) {
  return batch_gradients_serial(net, std::span<const SeqSample>(&sample, 1), kind, grads, ws);
}

}  // namespace rmc::core
