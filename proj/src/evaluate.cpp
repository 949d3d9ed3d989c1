#include "rtd3/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "rtd3/error.hpp"
#include "rtd3/rng.hpp"

namespace rtd3 {

DisturbedEnv::DisturbedEnv(const DisturbanceSpec& spec,
                           const PendulumParams& params)
    : spec_(spec), env_(params) {
  spec_.validate();
}

Observation DisturbedEnv::reset(Rng& reset_rng, Rng& schedule_rng,
                                Rng& noise_rng) {
  const Observation clean = env_.reset(reset_rng);
  schedule_ = init_episode(spec_, schedule_rng);
  return apply(schedule_, 0, clean, noise_rng);
}

DisturbedEnv::Step DisturbedEnv::step(double action, Rng& noise_rng) {
  const PendulumStep s = env_.step(action);
  return {apply(schedule_, s.next.step_index, observe(s.next), noise_rng),
          s.reward, s.done};
}

EvalResult summarize(std::vector<double> returns) {
  EvalResult r;
  if (returns.empty()) return r;
  const double n = static_cast<double>(returns.size());
  for (double v : returns) r.mean += v;
  r.mean /= n;
  for (double v : returns) r.std += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(r.std / n);
  r.returns = std::move(returns);
  return r;
}

EvalResult evaluate(const Network& actor, const VariantSpec& variant,
                    RolloutMemory memory, const DisturbanceSpec& scenario,
                    std::size_t episodes, std::uint64_t seed) {
  if (episodes == 0) throw ConfigError("evaluate: need at least one episode");
  if (obs_dim(scenario) != variant.obs_dim) {
    throw ConfigError("incompatible scenario: '" + scenario.to_string() +
                      "' yields " + std::to_string(obs_dim(scenario)) +
                      "-element observations, the actor takes " +
                      std::to_string(variant.obs_dim));
  }
  const std::size_t n = episodes;
  std::vector<DisturbedEnv> envs(n, DisturbedEnv(scenario));
  std::vector<Rng> noise;
  std::vector<Observation> obs(n);
  noise.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng reset = Rng::derive(seed, Stream::EnvReset, i);
    Rng sched = Rng::derive(seed, Stream::Disturbance, i);
    noise.push_back(Rng::derive(seed, Stream::ObservationNoise, i));
    obs[i] = envs[i].reset(reset, sched, noise[i]);
  }
  RolloutPolicy policy(variant, memory, n);
  std::vector<double> returns(n, 0.0);
  bool done = false;
  while (!done) {
    const PolicyDecision d = policy.decide(actor, obs, false);
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = d.action[i];
      const DisturbedEnv::Step s = envs[i].step(a, noise[i]);
      returns[i] += s.reward;
      policy.record(i, a);
      obs[i] = s.obs;
      done = done && s.done;
    }
  }
  return summarize(std::move(returns));
}

}  // namespace rtd3
