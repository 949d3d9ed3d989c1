#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rtd3/disturbance.hpp"
#include "rtd3/network.hpp"
#include "rtd3/pendulum.hpp"
#include "rtd3/policy.hpp"
#include "rtd3/variant.hpp"

namespace rtd3 {

// Pendulum seen through a disturbance scenario. The agent only ever gets
// the disturbed observation.
class DisturbedEnv {
 public:
  explicit DisturbedEnv(const DisturbanceSpec& spec,
                        const PendulumParams& params = {});

  struct Step {
    Observation obs;  // disturbed next observation
    double reward = 0.0;
    bool done = false;
  };

  Observation reset(Rng& reset_rng, Rng& schedule_rng, Rng& noise_rng);
  Step step(double action, Rng& noise_rng);

  const Pendulum& pendulum() const { return env_; }
  const DisturbanceSchedule& schedule() const { return schedule_; }

 private:
  DisturbanceSpec spec_;
  Pendulum env_;
  DisturbanceSchedule schedule_;
};

struct EvalResult {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over episodes
  std::vector<double> returns;
};

// Deterministic-policy returns of `episodes` episodes, run in lockstep as
// one batch. Episode i draws from sub-streams of `seed` salted by i, so the
// result depends only on (actor, scenario, episodes, seed). Throws
// ConfigError when the actor's observation size does not fit the scenario.
EvalResult evaluate(const Network& actor, const VariantSpec& variant,
                    RolloutMemory memory, const DisturbanceSpec& scenario,
                    std::size_t episodes, std::uint64_t seed);

EvalResult summarize(std::vector<double> returns);

}  // namespace rtd3
