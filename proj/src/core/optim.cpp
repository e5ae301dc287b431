#include "rmc/core/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace rmc::core {

void adam_update(AdamState& st, const ParamSpans& params, const GradSpans& grads, double lr) {
  require(params.size() == grads.size(), "adam_update: span count mismatch");
  size_t total = 0;
  for (const auto& p : params) total += p.size();
  require(total == st.m.size(), "adam_update: state sized for a different parameter set");

  st.step += 1;
  const double b1t = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double b2t = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  size_t off = 0;
  for (size_t k = 0; k < params.size(); ++k) {
    require(params[k].size() == grads[k].size(), "adam_update: block size mismatch");
    double* p = params[k].data();
    const double* g = grads[k].data();
    double* m = st.m.data() + off;
    double* v = st.v.data() + off;
    const size_t n = params[k].size();
    for (size_t j = 0; j < n; ++j) {
      m[j] = st.beta1 * m[j] + (1.0 - st.beta1) * g[j];
      v[j] = st.beta2 * v[j] + (1.0 - st.beta2) * g[j] * g[j];
      const double mhat = m[j] / b1t;
      const double vhat = v[j] / b2t;
      p[j] -= lr * mhat / (std::sqrt(vhat) + st.eps);
    }
    off += n;
  }
}

void sgd_update(const ParamSpans& params, const GradSpans& grads, double lr) {
  require(params.size() == grads.size(), "sgd_update: span count mismatch");
  for (size_t k = 0; k < params.size(); ++k) {
    require(params[k].size() == grads[k].size(), "sgd_update: block size mismatch");
    double* p = params[k].data();
    const double* g = grads[k].data();
    for (size_t j = 0; j < params[k].size(); ++j) p[j] -= lr * g[j];
  }
}

double clip_grad_norm(const std::vector<std::span<double>>& grads, double max_norm) {
  require(max_norm > 0.0, "clip_grad_norm: max_norm must be positive");
  double sq = 0.0;
  for (const auto& g : grads)
    for (double v : g) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& g : grads)
      for (double& v : g) v *= scale;
  }
  return norm;
}

double lr_at(const LrSchedule& s, int64_t n) {
  if (n < 0) throw std::domain_error("lr_at: negative iteration");
  if (s.kind == LrSchedule::Kind::constant) return s.eta_max;
  if (s.total <= 0) throw std::domain_error("lr_at: schedule horizon not set");
  if (n > s.total) throw std::domain_error("lr_at: iteration past schedule horizon");
  const double cut = std::max(1.0, std::floor(s.cut_frac * static_cast<double>(s.total)));
  const double t = static_cast<double>(n);
  const double frac =
      t < cut ? t / cut : 1.0 - (t - cut) / (cut * (1.0 / s.cut_frac - 1.0));
  return s.eta_max * (1.0 + frac * (s.ratio - 1.0)) / s.ratio;
}

}  // namespace rmc::core
