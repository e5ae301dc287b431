#pragma once

namespace rmc::sim {

struct PendulumConfig {
  double g = 10.0;
  double l = 1.0;
  double m = 1.0;
  bool linearized = false;
  double dt = 0.05;  // seconds
};

struct PendulumState {
  double theta = 0.0;
  double omega = 0.0;
};

// One dt advance under zero-order-hold torque, integrated with RK4.
PendulumState pendulum_step(const PendulumConfig& cfg, const PendulumState& s, double torque);

// (x, y) = (sin θ, cos θ).
void observe_pendulum(const PendulumState& s, double& x, double& y);

}  // namespace rmc::sim
