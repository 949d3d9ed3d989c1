#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "rtd3/network.hpp"
#include "rtd3/replay.hpp"

namespace rtd3 {

enum class VariantKind { Td3, LstmTd3, Lstm1ha1hc, Lstm1ha2hc, HTd3 };

// Algorithm variant plus the dimensions its networks are built for.
struct VariantSpec {
  VariantKind kind = VariantKind::Td3;
  bool include_action = true;  // LstmTd3: past actions in the history channel
  std::size_t history = 1;     // l, ignored by Td3
  std::size_t obs_dim = 3;
  std::size_t act_dim = 1;
  std::size_t hidden = 128;

  // td3 | lstm_td3 | lstm_td3_noact | lstm_td3_1ha1hc | lstm_td3_1ha2hc |
  // htd3. Dimensions keep their defaults.
  static VariantSpec parse(const std::string& name);
  std::string name() const;
  bool recurrent() const { return kind != VariantKind::Td3; }
  void validate() const;
  bool operator==(const VariantSpec&) const = default;
};

NetSpec actor_spec(const VariantSpec& v);
NetSpec critic_spec(const VariantSpec& v);

// Features per step of a sequence channel.
enum class SeqFeatures {
  Obs,         // o_k
  ObsPrevAct,  // (o_k, a_{k-1}): actor stream
  ObsAct,      // (o_k, a_k)
};

// Positions [first, first + count) of every window as a time-major
// sequence input. Invalid (padded) positions are masked. With ObsAct and a
// non-empty `last_action`, the action at the window's anchor position is
// replaced (policy actions in actor and target computations).
NetInput sequence_input(const WindowBatch& w, std::size_t first,
                        std::size_t count, SeqFeatures features,
                        std::span<const double> last_action = {});

// Where the evaluated action sits inside a critic input.
struct ActionSlot {
  bool in_sequence = false;
  std::size_t row_offset = 0;  // first row of the batch block
  std::size_t col = 0;
};

struct CriticInput {
  NetInput input;
  ActionSlot slot;
};

// Actor input for the anchor step of each window (full history form).
NetInput actor_input(const VariantSpec& v, const WindowBatch& w);

// Critic input for Q(history, o_t, action). HTd3 uses its replayed
// sequence form here: (o_k, a_{k-1}) for past steps, then (o_t, a_t).
CriticInput critic_input(const VariantSpec& v, const WindowBatch& w,
                         std::span<const double> action);

// One-step inputs seeded from a stored actor state (H-TD3 pathway).
NetInput seeded_actor_step(const WindowBatch& w, LstmState seed);
CriticInput seeded_critic_step(const WindowBatch& w,
                               std::span<const double> action,
                               LstmState seed);

// dQ/d(action) per sample, read out of a critic input gradient.
std::vector<double> action_gradient(const ActionSlot& slot,
                                    const NetInputGrad& grad,
                                    std::size_t batch);

}  // namespace rtd3
