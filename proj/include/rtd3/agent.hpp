#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rtd3/network.hpp"
#include "rtd3/optim.hpp"
#include "rtd3/replay.hpp"
#include "rtd3/variant.hpp"

namespace rtd3 {

class Rng;

struct Hyperparams {
  double gamma = 0.99;
  double tau = 0.005;
  std::size_t policy_delay = 2;
  double target_noise = 0.2;
  double target_noise_clip = 0.5;
  double exploration_noise = 0.1;
  std::size_t batch_size = 100;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  std::size_t start_steps = 1000;
  std::size_t updates_per_step = 1;
  double max_action = 2.0;
  // H-TD3 only: train the actor on the replayed (l+1)-step window instead
  // of one step seeded from the stored state.
  bool htd3_sequence_actor = false;

  void validate() const;
  bool operator==(const Hyperparams&) const = default;
};

struct UpdateStats {
  double critic_loss[2] = {0.0, 0.0};
  double actor_loss = 0.0;  // only meaningful when actor_updated
  bool actor_updated = false;
  double mean_q = 0.0;
  double mean_target = 0.0;
};

// dQ/da for each sample given the actor's actions.
using ActionGradient =
    std::function<std::vector<double>(std::span<const double> actions)>;

// Behavior and target networks of one TD3-family agent plus optimizers.
class Agent {
 public:
  Agent(const VariantSpec& variant, const Hyperparams& hyper,
        std::uint64_t seed);

  const VariantSpec& variant() const { return variant_; }
  const Hyperparams& hyper() const { return hyper_; }
  std::uint64_t update_count() const { return updates_; }

  Network& actor() { return actor_; }
  const Network& actor() const { return actor_; }
  Network& target_actor() { return target_actor_; }
  const Network& target_actor() const { return target_actor_; }
  Network& critic(std::size_t i) { return critics_.at(i); }
  const Network& critic(std::size_t i) const { return critics_.at(i); }
  Network& target_critic(std::size_t i) { return target_critics_.at(i); }
  const Network& target_critic(std::size_t i) const {
    return target_critics_.at(i);
  }

  // Batch in the form update() expects for this variant.
  HistoryBatch sample(const ReplayBuffer& buffer, Rng& rng) const;
  // True when update() reads stored actor states from the batch.
  bool uses_stored_states() const {
    return variant_.kind == VariantKind::HTd3;
  }
  std::size_t sample_history() const;

  // One TD3 update: both critics every call; actor and all targets every
  // policy_delay-th call. Throws NumericFault on a non-finite loss.
  UpdateStats update(const HistoryBatch& batch, Rng& target_noise_rng);

  // TD target per sample (exposed for tests).
  std::vector<double> td_targets(const HistoryBatch& batch,
                                 Rng& target_noise_rng) const;

  // One Adam step of the actor ascending an externally supplied dQ/da.
  // Returns the mean actor output before the step.
  double actor_step(const NetInput& actor_in, const ActionGradient& dq_da);

  // Actor input the update uses for the anchor step of `w`.
  NetInput update_actor_input(const HistoryBatch& batch, bool next) const;

  void sync_targets();
  void soft_update_targets();

  // Direct parameter restore (checkpoint load).
  void reset_optimizers();

 private:
  CriticInput update_critic_input(const HistoryBatch& batch, bool next,
                                  std::span<const double> action) const;

  VariantSpec variant_;
  Hyperparams hyper_;
  Network actor_, target_actor_;
  std::array<Network, 2> critics_, target_critics_;
  Adam actor_opt_;
  std::array<Adam, 2> critic_opt_;
  std::uint64_t updates_ = 0;
};

}  // namespace rtd3
