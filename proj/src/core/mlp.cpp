#include "rmc/core/mlp.hpp"

#include <algorithm>
#include <cmath>

namespace rmc::core {

Mlp Mlp::zeros(const std::vector<int>& sizes) {
  require(sizes.size() >= 2, "mlp: need at least input and output sizes");
  Mlp net;
  for (size_t k = 0; k + 1 < sizes.size(); ++k) {
    require(sizes[k] > 0 && sizes[k + 1] > 0, "mlp: sizes must be positive");
    net.w.emplace_back(sizes[k + 1], sizes[k]);
    net.b.emplace_back(sizes[k + 1], 0.0);
  }
  return net;
}

void Mlp::init(Rng& g) {
  for (size_t k = 0; k < w.size(); ++k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w[k].cols));
    for (double& v : w[k].a) v = uniform(g, -bound, bound);
    for (double& v : b[k]) v = 0.0;
  }
}

size_t Mlp::param_count() const {
  size_t n = 0;
  for (size_t k = 0; k < w.size(); ++k) n += w[k].size() + b[k].size();
  return n;
}

void mlp_forward(const Mlp& net, std::span<const double> x, Vec& out) {
  require(static_cast<int>(x.size()) == net.in_dim(), "mlp_forward: input size mismatch");
  Vec cur(x.begin(), x.end());
  Vec next;
  const int last = net.layers() - 1;
  for (int k = 0; k <= last; ++k) {
    const Mat& wk = net.w[k];
    next.assign(wk.rows, 0.0);
    for (int r = 0; r < wk.rows; ++r) {
      const double* wr = wk.a.data() + static_cast<size_t>(r) * wk.cols;
      double acc = net.b[k][r];
      for (int j = 0; j < wk.cols; ++j) acc += wr[j] * cur[j];
      next[r] = (k < last && acc < 0.0) ? 0.0 : acc;
    }
    cur.swap(next);
  }
  out = std::move(cur);
}

Vec mlp_forward(const Mlp& net, std::span<const double> x) {
  Vec out;
  mlp_forward(net, x, out);
  return out;
}

Mlp zeros_like(const Mlp& net) {
  Mlp z = net;
  for (Mat& m : z.w) m.fill(0.0);
  for (Vec& v : z.b) std::fill(v.begin(), v.end(), 0.0);
  return z;
}

void mlp_forward_cached(const Mlp& net, std::span<const double> x, MlpTrace& tr) {
  require(static_cast<int>(x.size()) == net.in_dim(), "mlp_forward_cached: input size mismatch");
  const int last = net.layers() - 1;
  tr.act.resize(static_cast<size_t>(last) + 2);
  tr.act[0].assign(x.begin(), x.end());
  for (int k = 0; k <= last; ++k) {
    const Mat& wk = net.w[k];
    const Vec& in = tr.act[k];
    Vec& out = tr.act[k + 1];
    out.assign(static_cast<size_t>(wk.rows), 0.0);
    for (int r = 0; r < wk.rows; ++r) {
      const double* wr = wk.a.data() + static_cast<size_t>(r) * wk.cols;
      double acc = net.b[k][r];
      for (int j = 0; j < wk.cols; ++j) acc += wr[j] * in[j];
      out[r] = (k < last && acc < 0.0) ? 0.0 : acc;
    }
  }
}

void mlp_backward(const Mlp& net, const MlpTrace& tr, std::span<const double> dout, Mlp& grads,
                  Vec* dx) {
  require(tr.act.size() == static_cast<size_t>(net.layers()) + 1, "mlp_backward: stale trace");
  require(static_cast<int>(dout.size()) == net.out_dim(), "mlp_backward: dout size mismatch");
  require(grads.w.size() == net.w.size(), "mlp_backward: gradient shape mismatch");
  const int last = net.layers() - 1;
  Vec delta(dout.begin(), dout.end());
  Vec dprev;
  for (int k = last; k >= 0; --k) {
    const Mat& wk = net.w[k];
    const Vec& in = tr.act[k];
    // relu'(0) = 0, matching the forward pass's (acc < 0) cut.
    if (k < last) {
      const Vec& out = tr.act[k + 1];
      for (int r = 0; r < wk.rows; ++r)
        if (out[r] <= 0.0) delta[r] = 0.0;
    }
    Mat& gw = grads.w[k];
    Vec& gb = grads.b[k];
    dprev.assign(static_cast<size_t>(wk.cols), 0.0);
    for (int r = 0; r < wk.rows; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      const double* wr = wk.a.data() + static_cast<size_t>(r) * wk.cols;
      double* gr = gw.a.data() + static_cast<size_t>(r) * wk.cols;
      for (int j = 0; j < wk.cols; ++j) {
        gr[j] += d * in[j];
        dprev[j] += d * wr[j];
      }
      gb[r] += d;
    }
    delta.swap(dprev);
  }
  if (dx != nullptr) *dx = std::move(delta);
}

}  // namespace rmc::core
