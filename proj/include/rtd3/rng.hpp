#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rtd3 {

// Independent random streams of one run. Each consumer draws from its own
// stream so that, e.g., changing the exploration noise never perturbs the
// disturbance schedule.
enum class Stream : std::uint32_t {
  EnvReset = 1,
  Disturbance = 2,
  ObservationNoise = 3,
  Exploration = 4,
  Replay = 5,
  TargetNoise = 6,
  Init = 7,
  Evaluation = 8,
  Synthetic = 9,
};

class Rng {
 public:
  static constexpr std::string_view kAlgorithm =
      "mt19937_64, sub-streams seeded by std::seed_seq(seed, stream, salt)";

  explicit Rng(std::uint64_t seed = 0);

  // Sub-stream `stream` (optionally salted, e.g. by episode index) of `seed`.
  static Rng derive(std::uint64_t seed, Stream stream, std::uint64_t salt = 0);

  double uniform(double lo, double hi);
  double normal(double mean, double stddev);
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace rtd3
