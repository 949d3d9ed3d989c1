#include "rtd3/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rtd3/error.hpp"
#include "rtd3/rng.hpp"

namespace rtd3 {

double angle_normalize(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = theta - two_pi * std::round(theta / two_pi);
  // round() leaves r in [-pi, pi]; fold the closed lower end up.
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

Observation observe(const PendulumState& s) {
  Observation o;
  o.values = {std::cos(s.theta), std::sin(s.theta), s.theta_dot};
  o.size = 3;
  return o;
}

PendulumStep pendulum_step(const PendulumState& s, double torque,
                           const PendulumParams& p) {
  if (!std::isfinite(torque)) {
    throw NumericFault("pendulum: non-finite torque");
  }
  const double u = std::clamp(torque, -p.max_torque, p.max_torque);
  const double th = angle_normalize(s.theta);
  PendulumStep out;
  out.reward =
      -(th * th + 0.1 * s.theta_dot * s.theta_dot + 0.001 * u * u);

  const double accel =
      3.0 * p.gravity / (2.0 * p.length) * std::sin(s.theta) +
      3.0 / (p.mass * p.length * p.length) * u;
  const double new_dot =
      std::clamp(s.theta_dot + accel * p.dt, -p.max_speed, p.max_speed);
  out.next.theta = s.theta + new_dot * p.dt;
  out.next.theta_dot = new_dot;
  out.next.step_index = s.step_index + 1;
  out.done = out.next.step_index >= p.horizon;
  return out;
}

PendulumState pendulum_reset(Rng& rng) {
  PendulumState s;
  s.theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
  s.theta_dot = rng.uniform(-1.0, 1.0);
  s.step_index = 0;
  return s;
}

Observation Pendulum::reset(Rng& rng) {
  state_ = pendulum_reset(rng);
  return observe(state_);
}

PendulumStep Pendulum::step(double torque) {
  auto r = pendulum_step(state_, torque, params_);
  state_ = r.next;
  return r;
}

}  // namespace rtd3
