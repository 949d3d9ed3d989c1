#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rtd3 {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam over one flat parameter buffer.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, AdamConfig config);

  void step(std::span<double> params, std::span<const double> grads);

  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

// target <- tau * source + (1 - tau) * target, elementwise.
void polyak_update(std::span<double> target, std::span<const double> source,
                   double tau);

}  // namespace rtd3
