#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace rtd3 {

class Rng;

// Up to three observation components: [cos theta, sin theta, theta_dot], or
// the first two when angular velocity is hidden.
struct Observation {
  std::array<double, 3> values{};
  std::size_t size = 3;

  std::span<double> span() { return {values.data(), size}; }
  std::span<const double> span() const { return {values.data(), size}; }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  bool operator==(const Observation&) const = default;
};

// Swing-up pendulum constants. theta = 0 is upright.
struct PendulumParams {
  double gravity = 10.0;
  double mass = 1.0;
  double length = 1.0;
  double dt = 0.05;
  double max_speed = 8.0;
  double max_torque = 2.0;
  std::size_t horizon = 200;
};

struct PendulumState {
  double theta = 0.0;
  double theta_dot = 0.0;
  std::size_t step_index = 0;
};

struct PendulumStep {
  PendulumState next;
  double reward = 0.0;
  bool done = false;
};

// Maps theta into (-pi, pi].
double angle_normalize(double theta);

Observation observe(const PendulumState& s);

// Clips the torque, charges -(theta^2 + 0.1 theta_dot^2 + 0.001 u^2) on the
// pre-step normalized angle, then integrates one semi-implicit Euler step.
// Throws NumericFault on a non-finite torque.
PendulumStep pendulum_step(const PendulumState& s, double torque,
                           const PendulumParams& p = {});

// theta ~ U(-pi, pi), theta_dot ~ U(-1, 1).
PendulumState pendulum_reset(Rng& rng);

// Stateful wrapper for rollout code.
class Pendulum {
 public:
  explicit Pendulum(PendulumParams params = {}) : params_(params) {}

  Observation reset(Rng& rng);
  PendulumStep step(double torque);

  const PendulumState& state() const { return state_; }
  void set_state(const PendulumState& s) { state_ = s; }
  const PendulumParams& params() const { return params_; }

 private:
  PendulumParams params_;
  PendulumState state_;
};

}  // namespace rtd3
