#include "rtd3/optim.hpp"

#include <cmath>

#include "rtd3/error.hpp"

namespace rtd3 {

Adam::Adam(std::size_t size, AdamConfig config)
    : config_(config), m_(size, 0.0), v_(size, 0.0) {
  if (!(config.learning_rate > 0.0) || !(config.beta1 >= 0.0) ||
      !(config.beta1 < 1.0) || !(config.beta2 >= 0.0) ||
      !(config.beta2 < 1.0) || !(config.epsilon > 0.0)) {
    throw ConfigError("Adam: invalid hyperparameters");
  }
}

void Adam::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ContractViolation("Adam::step: size mismatch");
  }
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

void polyak_update(std::span<double> target, std::span<const double> source,
                   double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw ConfigError("polyak_update: tau must lie in [0, 1]");
  }
  if (target.size() != source.size()) {
    throw ContractViolation("polyak_update: size mismatch");
  }
  for (std::size_t i = 0; i < target.size(); ++i) {
    target[i] = tau * source[i] + (1.0 - tau) * target[i];
  }
}

}  // namespace rtd3
