#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rtd3/network.hpp"
#include "rtd3/pendulum.hpp"
#include "rtd3/replay.hpp"
#include "rtd3/variant.hpp"

namespace rtd3 {

// How a recurrent actor remembers the episode while acting.
enum class RolloutMemory {
  // Re-run the actor over the last l steps from a zero state, exactly the
  // window it sees in training.
  Window,
  // Carry the LSTM state across the whole episode, one step at a time.
  Carried,
};

RolloutMemory parse_rollout_memory(const std::string& name);
const char* rollout_memory_name(RolloutMemory m);

struct PolicyDecision {
  std::vector<double> action;  // deterministic actor output per env
  // Actor states around the current step, per env (capture only).
  std::vector<StoredLstmState> lstm_in;
  std::vector<StoredLstmState> lstm_out;
};

// Per-episode context for a batch of lockstep environments. Call begin()
// at episode start, decide() for the current observations, then record()
// with the executed actions.
class RolloutPolicy {
 public:
  RolloutPolicy(const VariantSpec& variant, RolloutMemory memory,
                std::size_t envs);

  std::size_t envs() const { return envs_; }
  void begin(std::size_t env);
  void begin_all();
  // `capture` also returns the actor states H-TD3 stores.
  PolicyDecision decide(const Network& actor,
                        const std::vector<Observation>& obs, bool capture);
  void record(std::size_t env, double action);

  // The actor's window for the pending decision (exposed for tests).
  WindowBatch window(const std::vector<Observation>& obs) const;

 private:
  struct Step {
    Observation obs;
    double prev_act = 0.0;
    double act = 0.0;
  };
  struct Episode {
    std::vector<Step> past;  // oldest first, at most l
    double prev_act = 0.0;
    Observation pending;
    std::size_t t = 0;
  };

  PolicyDecision decide_window(const Network& actor,
                               const std::vector<Observation>& obs,
                               bool capture);
  PolicyDecision decide_carried(const Network& actor,
                                const std::vector<Observation>& obs,
                                bool capture);

  VariantSpec variant_;
  RolloutMemory memory_;
  std::size_t envs_;
  std::vector<Episode> episodes_;
  LstmState carried_;  // Carried mode, envs x H
  LstmState next_carried_;
};

StoredLstmState state_row(const LstmState& s, std::size_t row);

}  // namespace rtd3
