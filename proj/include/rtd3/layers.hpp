#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rtd3/matrix.hpp"

namespace rtd3 {

class Rng;

struct ParameterSlot {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;
};

// All learnable scalars of one network in a single flat buffer. Layers keep
// slot indices, never pointers, so networks copy by value.
class ParameterSet {
 public:
  std::size_t add(std::string name, std::size_t rows, std::size_t cols);

  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<ParameterSlot>& slots() const { return slots_; }

  ConstMatrixView value(std::size_t slot) const;
  MatrixView value(std::size_t slot);
  // The same slot inside a caller-owned buffer laid out like values()
  // (gradients, optimizer moments).
  MatrixView slice(std::span<double> flat, std::size_t slot) const;

  std::vector<double> zeros_like() const {
    return std::vector<double>(values_.size(), 0.0);
  }

 private:
  std::vector<ParameterSlot> slots_;
  std::vector<double> values_;
};

// In-place activations and their backward passes expressed through the
// activated output.
void relu_inplace(Matrix& x);
void relu_backward(ConstMatrixView activated, Matrix& grad);
void tanh_inplace(Matrix& x);
void tanh_backward(ConstMatrixView activated, Matrix& grad);

// y = x W^T + b.
class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet& params, const std::string& name, std::size_t in,
         std::size_t out);

  static constexpr std::size_t param_count(std::size_t in, std::size_t out) {
    return out * in + out;
  }

  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }

  // Uniform in +-1/sqrt(in) for weight and bias.
  void init(ParameterSet& params, Rng& rng) const;

  Matrix forward(const ParameterSet& params, ConstMatrixView x) const;

  // Adds dL/dW and dL/db into `grads` (skipped when `grads` is empty) and
  // writes dL/dx into `dx` when non-null.
  void backward(const ParameterSet& params, std::span<double> grads,
                ConstMatrixView x, ConstMatrixView dy, Matrix* dx) const;

  std::size_t weight_slot() const { return weight_; }
  std::size_t bias_slot() const { return bias_; }

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  std::size_t weight_ = 0;
  std::size_t bias_ = 0;
};

// Hidden and cell state for a batch, each (batch x H).
struct LstmState {
  Matrix h;
  Matrix c;

  static LstmState zeros(std::size_t batch, std::size_t hidden) {
    return {Matrix(batch, hidden), Matrix(batch, hidden)};
  }
  std::size_t batch() const { return h.rows(); }
  bool operator==(const LstmState&) const = default;
};

// Everything a forward pass over a sequence keeps for exact BPTT. Rows are
// time-major: step t of sample b is row t * batch + b.
struct LstmCache {
  std::size_t steps = 0;
  std::size_t batch = 0;
  Matrix gates;      // post-activation [input, forget, cell, output]
  Matrix cell;       // c_t
  Matrix cell_tanh;  // tanh(c_t)
  Matrix hidden;     // h_t, the per-step outputs
  LstmState init;
  LstmState final;
  std::vector<std::uint8_t> mask;  // empty: every step valid
};

// LSTM with separate input and recurrent biases, gate blocks ordered
// [input, forget, cell-candidate, output].
//
//   z = W_ih x + b_ih + W_hh h + b_hh
//   i = sigma(z_i), f = sigma(z_f), g = tanh(z_g), o = sigma(z_o)
//   c' = f * c + i * g,  h' = o * tanh(c')
//
// A masked (invalid) step passes the previous state through unchanged. With
// front padding and a zero initial state this makes padded steps inert.
class Lstm {
 public:
  Lstm() = default;
  Lstm(ParameterSet& params, const std::string& name, std::size_t in,
       std::size_t hidden);

  static constexpr std::size_t param_count(std::size_t in,
                                           std::size_t hidden) {
    return 4 * (hidden * in + hidden * hidden + 2 * hidden);
  }

  std::size_t in() const { return in_; }
  std::size_t hidden() const { return hidden_; }

  // Uniform in +-1/sqrt(fan_in) for weights, +-1/sqrt(H) for biases.
  void init(ParameterSet& params, Rng& rng) const;

  // xs: (steps * batch) x in, time-major. `mask` is empty or steps * batch.
  LstmCache forward(const ParameterSet& params, ConstMatrixView xs,
                    std::size_t steps, std::span<const std::uint8_t> mask,
                    const LstmState& init) const;

  // One step for a batch; equivalent to forward() with steps = 1.
  LstmState step(const ParameterSet& params, ConstMatrixView x,
                 const LstmState& state) const;

  // Reverse-mode pass through the whole sequence. `dh_all` carries upstream
  // gradients on every h_t (may be empty), `d_final` on the final state (may
  // be null). Parameter gradients are added into `grads` unless it is empty;
  // dL/dxs and dL/d(init) are written when the pointers are non-null.
  void backward(const ParameterSet& params, std::span<double> grads,
                const LstmCache& cache, ConstMatrixView xs,
                ConstMatrixView dh_all, const LstmState* d_final, Matrix* dx,
                LstmState* d_init) const;

  std::size_t w_ih_slot() const { return w_ih_; }
  std::size_t w_hh_slot() const { return w_hh_; }
  std::size_t b_ih_slot() const { return b_ih_; }
  std::size_t b_hh_slot() const { return b_hh_; }

 private:
  std::string name_;
  std::size_t in_ = 0;
  std::size_t hidden_ = 0;
  std::size_t w_ih_ = 0;
  std::size_t w_hh_ = 0;
  std::size_t b_ih_ = 0;
  std::size_t b_hh_ = 0;
};

}  // namespace rtd3
