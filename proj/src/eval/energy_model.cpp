#include "rmc/eval/energy_model.hpp"

#include <algorithm>
#include <cmath>

namespace rmc::eval {

using core::require;

void EnergyModel::validate() const {
  require(sign.size() == w.size(), "energy model: one sign per coefficient");
  for (size_t j = 0; j < w.size(); ++j) {
    require(std::isfinite(w[j]), "energy model: non-finite coefficient");
    require(sign[j] >= -1 && sign[j] <= 1, "energy model: sign must be -1, 0, or +1");
    if (sign[j] > 0) require(w[j] >= 0.0, "energy model: constrained coefficient went negative");
    if (sign[j] < 0) require(w[j] <= 0.0, "energy model: constrained coefficient went positive");
  }
  require(std::isfinite(b), "energy model: non-finite bias");
}

double EnergyModel::predict(std::span<const double> x) const {
  require(x.size() == w.size(), "energy model: feature size mismatch");
  double z = b;
  for (size_t j = 0; j < w.size(); ++j) z += w[j] * x[j];
  return std::max(0.0, z);
}

EnergyModel fit_energy_model(const Mat& x, const Vec& y, const std::vector<int>& sign,
                             int iters, double lr) {
  const int n = x.rows, p = x.cols;
  require(static_cast<int>(y.size()) == n, "energy fit: one target per row");
  require(static_cast<int>(sign.size()) == p, "energy fit: one sign per feature");
  require(iters >= 1 && lr > 0.0, "energy fit: bad schedule");
  if (n < p + 1) throw core::NumericError("energy fit: not enough rows to identify the model");
  if (!core::all_finite(x.a) || !core::all_finite(y))
    throw core::NumericError("energy fit: non-finite input");
  for (double v : y) require(v >= 0.0, "energy fit: rectified targets cannot be negative");

  // standardized copy; positive scales keep the sign constraints intact
  Vec mean(p, 0.0), scale(p, 0.0);
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < p; ++j) mean[j] += x(t, j);
  for (double& v : mean) v /= n;
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < p; ++j) {
      const double d = x(t, j) - mean[j];
      scale[j] += d * d;
    }
  for (double& v : scale) v = std::max(std::sqrt(v / n), 1e-9);

  double y_scale = 0.0;
  for (double v : y) y_scale += std::abs(v);
  y_scale = std::max(y_scale / n, 1e-9);

  Vec w(p, 0.0);
  double b = 1.0;  // start in the active region: targets are nonnegative
  Vec gw(p, 0.0);
  for (int it = 0; it < iters; ++it) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    double loss = 0.0;
    for (int t = 0; t < n; ++t) {
      double z = b;
      for (int j = 0; j < p; ++j) z += w[j] * (x(t, j) - mean[j]) / scale[j];
      const double resid = std::max(0.0, z) - y[t] / y_scale;
      loss += resid * resid;
      if (z > 0.0) {
        for (int j = 0; j < p; ++j) gw[j] += 2.0 * resid * (x(t, j) - mean[j]) / scale[j];
        gb += 2.0 * resid;
      }
    }
    if (!std::isfinite(loss)) throw core::NumericError("energy fit: loss diverged");
    for (int j = 0; j < p; ++j) {
      w[j] -= lr * gw[j] / n;
      if (sign[j] > 0) w[j] = std::max(0.0, w[j]);
      if (sign[j] < 0) w[j] = std::min(0.0, w[j]);
    }
    b -= lr * gb / n;
  }

  EnergyModel m;
  m.sign = sign;
  m.w.assign(p, 0.0);
  m.b = b * y_scale;
  for (int j = 0; j < p; ++j) {
    m.w[j] = w[j] * y_scale / scale[j];
    m.b -= m.w[j] * mean[j];
  }
  m.validate();
  return m;
}

double relative_fit_error(const EnergyModel& m, const Mat& x, const Vec& y) {
  require(static_cast<int>(y.size()) == x.rows && x.rows >= 1, "fit error: misaligned data");
  double err = 0.0, mag = 0.0;
  for (int t = 0; t < x.rows; ++t) {
    err += std::abs(m.predict(x.row(t)) - y[t]);
    mag += std::abs(y[t]);
  }
  return err / std::max(mag, 1e-12);
}

void building_energy_samples(const std::vector<sim::RoomSpec>& rooms,
                             const sim::EpisodeDataset& data, Mat& x, Vec& y_heat, Vec& y_cool) {
  const int nr = static_cast<int>(rooms.size());
  require(data.d_cmd() == 2 * nr + 3 && data.d_ext() == 2 && data.d_obs() == nr,
          "energy samples: dataset layout mismatch");
  const int n = data.steps();
  x.reshape(n, kEnergyFeatures);
  y_heat.assign(n, 0.0);
  y_cool.assign(n, 0.0);
  sim::BuildingCommand cmd;
  cmd.valve.assign(nr, 0.0);
  cmd.blind.assign(nr, 0);
  Vec t_room(nr, 0.0);
  const double kwh = 600.0 / 3.6e6;
  for (int t = 0; t < n; ++t) {
    for (int i = 0; i < nr; ++i) {
      cmd.valve[i] = data.cmd(t, i);
      t_room[i] = data.obs(t, i);
    }
    cmd.t_flow = data.cmd(t, 2 * nr);
    cmd.t_air = data.cmd(t, 2 * nr + 1);
    cmd.c_r = data.cmd(t, 2 * nr + 2);
    const double t_out = data.ext(t, 0);
    const sim::StepEnergy e = sim::building_power(rooms, t_room, cmd, t_out);
    y_heat[t] = (std::max(e.coil_w, 0.0) + std::max(e.ahu_w, 0.0)) * kwh;
    y_cool[t] = (std::max(-e.coil_w, 0.0) + std::max(-e.ahu_w, 0.0)) * kwh;
    x(t, 0) = cmd.t_flow;
    x(t, 1) = cmd.t_air;
    x(t, 2) = cmd.c_r;
    x(t, 3) = t_out;
    x(t, 4) = data.ext(t, 1);
  }
}

BuildingEnergyModel fit_building_energy(const std::vector<sim::RoomSpec>& rooms,
                                        const sim::EpisodeDataset& data) {
  Mat x;
  Vec y_heat, y_cool;
  building_energy_samples(rooms, data, x, y_heat, y_cool);
  BuildingEnergyModel m;
  m.heating = fit_energy_model(x, y_heat, {+1, +1, 0, -1, 0});
  m.cooling = fit_energy_model(x, y_cool, {-1, -1, 0, +1, 0});
  return m;
}

std::pair<double, double> energy_estimate(const BuildingEnergyModel& m, const Mat& features) {
  require(features.cols == kEnergyFeatures, "energy estimate: feature layout mismatch");
  double heat = 0.0, cool = 0.0;
  for (int t = 0; t < features.rows; ++t) {
    heat += m.heating.predict(features.row(t));
    cool += m.cooling.predict(features.row(t));
  }
  return {heat, cool};
}

}  // namespace rmc::eval
