#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rtd3/layers.hpp"
#include "rtd3/matrix.hpp"

namespace rtd3 {

class Rng;

// Shape of an actor or critic. Every architecture in this project is an
// instance of
//
//   sequence channel:  Lin(seq_in, H) -> ReLU -> LSTM(H, H) -> final h
//   current channel:   Lin(ff_in, H)  -> ReLU
//   trunk:             concat -> Lin(k*H, H) -> ReLU -> Lin(H, 1) [-> tanh]
//
// with either channel optional (k = number of channels present).
struct NetSpec {
  std::size_t seq_in = 0;  // 0: no sequence channel
  std::size_t ff_in = 0;   // 0: no current-step channel
  std::size_t hidden = 128;
  bool tanh_output = false;
  double output_scale = 1.0;  // applied after tanh

  std::size_t channels() const {
    return (seq_in > 0 ? 1 : 0) + (ff_in > 0 ? 1 : 0);
  }
  std::size_t param_count() const;
  bool operator==(const NetSpec&) const = default;
};

struct NetInput {
  // Sequence channel: (steps * batch) x seq_in, time-major.
  Matrix seq;
  std::size_t steps = 0;
  std::vector<std::uint8_t> mask;  // steps * batch, empty = all valid
  std::optional<LstmState> init;   // zero state when absent
  // Current-step channel: batch x ff_in.
  Matrix ff;

  std::size_t batch() const;
};

struct NetCache {
  Matrix seq_act;  // ReLU(Lin(seq))
  LstmCache lstm;
  Matrix ff_act;   // ReLU(Lin(ff))
  Matrix joined;   // trunk input
  Matrix trunk_act;
  Matrix out;      // network output (after tanh and scale if any)
  Matrix out_tanh; // tanh before scaling, actor heads only
};

struct NetInputGrad {
  Matrix seq;
  Matrix ff;
};

class Network {
 public:
  Network() = default;
  explicit Network(const NetSpec& spec);
  Network(const NetSpec& spec, Rng& init_rng);

  const NetSpec& spec() const { return spec_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  // batch x 1. Fills `cache` (needed for backward) when non-null.
  Matrix forward(const NetInput& in, NetCache* cache = nullptr) const;

  // Final LSTM state of the sequence channel.
  LstmState encode(const NetInput& in) const;

  // Backward from dL/d(output) (batch x 1). Parameter gradients are added
  // into `grads` unless it is empty; input gradients go to `d_in` when set.
  // Gradients w.r.t. a provided initial LSTM state are discarded: stored
  // states are inputs, not parameters.
  void backward(const NetInput& in, const NetCache& cache,
                ConstMatrixView d_out, std::span<double> grads,
                NetInputGrad* d_in) const;

  const Lstm& lstm() const { return lstm_; }
  const Linear& seq_input() const { return seq_lin_; }

  void init(Rng& rng);

 private:
  NetSpec spec_;
  ParameterSet params_;
  Linear seq_lin_;
  Lstm lstm_;
  Linear ff_lin_;
  Linear trunk_lin_;
  Linear out_lin_;
};

}  // namespace rtd3
