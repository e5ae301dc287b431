#include "rmc/eval/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rmc::eval {

using core::require;

Vec mae(const Mat& predicted, const Mat& observed) {
  require(predicted.rows == observed.rows && predicted.cols == observed.cols,
          "mae: series not aligned");
  require(predicted.rows >= 1, "mae: empty series");
  Vec out(predicted.cols, 0.0);
  for (int t = 0; t < predicted.rows; ++t)
    for (int c = 0; c < predicted.cols; ++c) out[c] += std::abs(predicted(t, c) - observed(t, c));
  for (double& v : out) v /= predicted.rows;
  return out;
}

double mean_radius_error(const Vec& x, const Vec& y) {
  require(x.size() == y.size() && !x.empty(), "mean_radius_error: series not aligned");
  double sum = 0.0;
  for (size_t i = 0; i < x.size(); ++i) sum += std::abs(std::hypot(x[i], y[i]) - 1.0);
  return sum / static_cast<double>(x.size());
}

ComfortStats comfort_metrics(const Mat& room_temps, int steps_per_day) {
  require(steps_per_day >= 1, "comfort_metrics: steps_per_day must be positive");
  require(room_temps.cols >= 1, "comfort_metrics: no rooms");
  require(room_temps.rows >= steps_per_day && room_temps.rows % steps_per_day == 0,
          "comfort_metrics: record must cover whole days");

  const int days = room_temps.rows / steps_per_day;
  ComfortStats s;
  for (int d = 0; d < days; ++d) {
    double day_max = 0.0;
    for (int t = d * steps_per_day; t < (d + 1) * steps_per_day; ++t) {
      double dev = 0.0;
      for (int r = 0; r < room_temps.cols; ++r) dev += std::abs(room_temps(t, r) - 23.0);
      day_max = std::max(day_max, dev);
    }
    s.mdev += day_max;
    for (int r = 0; r < room_temps.cols; ++r) {
      bool hot = false, cold = false;
      for (int t = d * steps_per_day; t < (d + 1) * steps_per_day; ++t) {
        hot = hot || room_temps(t, r) > 26.0;
        cold = cold || room_temps(t, r) < 20.0;
      }
      s.n_hot += hot;
      s.n_cold += cold;
    }
  }
  s.mdev /= days;
  return s;
}

void MetricReport::validate() const {
  require(days >= 0, "metric report: negative period");
  require(mdev >= 0.0 && std::isfinite(mdev), "metric report: bad mdev");
  require(n_hot >= 0 && n_cold >= 0, "metric report: negative day counts");
  require(heat_kwh >= 0.0 && cool_kwh >= 0.0, "metric report: negative energy");
  require(radius_error >= 0.0, "metric report: negative radius error");
  for (double v : channel_mae) require(v >= 0.0, "metric report: negative error");
}

void save_metric_reports(const std::vector<MetricReport>& reports, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  require(f != nullptr, "save_metric_reports: cannot open " + path);
  std::fprintf(f, "controller,model,days,mdev,cooling_kwh,heating_kwh,n_above_26,n_below_20\n");
  for (const MetricReport& r : reports) {
    r.validate();
    std::fprintf(f, "%s,%s,%d,%.17g,%.17g,%.17g,%d,%d\n", r.controller.c_str(), r.model.c_str(),
                 r.days, r.mdev, r.cool_kwh, r.heat_kwh, r.n_hot, r.n_cold);
  }
  std::fclose(f);
}

void save_energy_comfort_scatter(const std::vector<MetricReport>& reports,
                                 const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  require(f != nullptr, "save_energy_comfort_scatter: cannot open " + path);
  std::fprintf(f, "controller,model,total_kwh,mdev\n");
  for (const MetricReport& r : reports)
    std::fprintf(f, "%s,%s,%.17g,%.17g\n", r.controller.c_str(), r.model.c_str(),
                 r.heat_kwh + r.cool_kwh, r.mdev);
  std::fclose(f);
}

}  // namespace rmc::eval
