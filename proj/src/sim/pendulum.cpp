#include "rmc/sim/pendulum.hpp"

#include <cmath>

namespace rmc::sim {

namespace {

struct Deriv {
  double dtheta, domega;
};

Deriv deriv(const PendulumConfig& cfg, double theta, double omega, double torque) {
  const double restoring = cfg.linearized ? theta : std::sin(theta);
  return {omega, -(cfg.g / cfg.l) * restoring - torque / (cfg.m * cfg.l * cfg.l)};
}

}  // namespace

PendulumState pendulum_step(const PendulumConfig& cfg, const PendulumState& s, double torque) {
  const double h = cfg.dt;
  const Deriv k1 = deriv(cfg, s.theta, s.omega, torque);
  const Deriv k2 = deriv(cfg, s.theta + 0.5 * h * k1.dtheta, s.omega + 0.5 * h * k1.domega, torque);
  const Deriv k3 = deriv(cfg, s.theta + 0.5 * h * k2.dtheta, s.omega + 0.5 * h * k2.domega, torque);
  const Deriv k4 = deriv(cfg, s.theta + h * k3.dtheta, s.omega + h * k3.domega, torque);
  PendulumState out;
  out.theta = s.theta + h / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta);
  out.omega = s.omega + h / 6.0 * (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega);
  return out;
}

void observe_pendulum(const PendulumState& s, double& x, double& y) {
  x = std::sin(s.theta);
  y = std::cos(s.theta);
}

}  // namespace rmc::sim
