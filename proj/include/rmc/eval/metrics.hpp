#pragma once

#include <string>
#include <vector>

#include "rmc/core/types.hpp"

namespace rmc::eval {

using core::Mat;
using core::Vec;

// Mean absolute error per output channel over aligned series.
Vec mae(const Mat& predicted, const Mat& observed);

// Mean distance of the points (x_i, y_i) from the unit circle. Zero iff
// every point lies exactly on it; the physical-consistency score for
// models predicting an angle through its sine and cosine.
double mean_radius_error(const Vec& x, const Vec& y);

// Comfort summary of a temperature record, rows = steps, cols = rooms.
// The instantaneous deviation is the sum over rooms of |T - 23|; mdev
// averages the daily maxima of that sum. A room contributes one room-day
// to n_hot when any step of that day exceeds 26 degrees, and to n_cold
// when any step falls below 20.
struct ComfortStats {
  double mdev = 0.0;
  int n_hot = 0;
  int n_cold = 0;
};

ComfortStats comfort_metrics(const Mat& room_temps, int steps_per_day = 144);

// One evaluated (controller, model) pairing, or a model-accuracy row when
// only the error fields are filled.
struct MetricReport {
  std::string controller;
  std::string model;
  int days = 0;
  double mdev = 0.0;
  int n_hot = 0;
  int n_cold = 0;
  double heat_kwh = 0.0;
  double cool_kwh = 0.0;
  Vec channel_mae;            // model-accuracy rows
  double radius_error = 0.0;  // pendulum model-accuracy rows

  void validate() const;
};

void save_metric_reports(const std::vector<MetricReport>& reports, const std::string& path);

// (total energy, mdev) pairs for plotting comfort against consumption.
void save_energy_comfort_scatter(const std::vector<MetricReport>& reports,
                                 const std::string& path);

}  // namespace rmc::eval
