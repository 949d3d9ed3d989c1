#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rtd3/matrix.hpp"
#include "rtd3/pendulum.hpp"

namespace rtd3 {

class Rng;

// Actor LSTM (h, c) for a single sample, as recorded during rollout.
struct StoredLstmState {
  std::vector<double> h;
  std::vector<double> c;
  bool operator==(const StoredLstmState&) const = default;
};

struct Transition {
  Observation obs;
  double act = 0.0;
  double reward = 0.0;
  Observation next_obs;
  bool done = false;      // last step of the episode (time limit included)
  bool terminal = false;  // true terminal state; time limits never set this
  double prev_act = 0.0;  // action at t-1, zero at episode start
  std::optional<StoredLstmState> lstm_in;   // actor state before step t
  std::optional<StoredLstmState> lstm_out;  // state seeding step t+1
};

// `batch` windows of `length` consecutive steps of one episode each. The
// last position is the anchor step; earlier positions are history and are
// zero-padded at the front when the episode (or the buffer) is shorter.
struct WindowBatch {
  std::size_t batch = 0;
  std::size_t length = 0;
  std::size_t obs_dim = 0;
  std::vector<double> obs;       // batch x length x obs_dim
  std::vector<double> prev_act;  // batch x length, a_{k-1} at position k
  std::vector<double> act;       // batch x length, a_k at position k
  std::vector<std::size_t> valid_past;  // real history steps, <= length - 1

  void resize(std::size_t batch, std::size_t length, std::size_t obs_dim);
  bool valid(std::size_t b, std::size_t p) const {
    return p + 1 + valid_past[b] >= length;
  }
  const double* obs_at(std::size_t b, std::size_t p) const {
    return obs.data() + (b * length + p) * obs_dim;
  }
  double* obs_at(std::size_t b, std::size_t p) {
    return obs.data() + (b * length + p) * obs_dim;
  }
  double prev_act_at(std::size_t b, std::size_t p) const {
    return prev_act[b * length + p];
  }
  double act_at(std::size_t b, std::size_t p) const {
    return act[b * length + p];
  }
};

// Training batch for every variant. `current` covers steps t-l..t, `next`
// covers t-l+1..t+1; the action at t+1 is unknown and left zero in
// next.act. With history 0 the windows hold just the anchor step.
struct HistoryBatch {
  std::size_t batch = 0;
  std::size_t history = 0;
  std::size_t obs_dim = 0;
  WindowBatch current;
  WindowBatch next;
  std::vector<double> reward;
  std::vector<std::uint8_t> done;
  std::vector<std::uint8_t> terminal;
  std::vector<std::size_t> indices;  // logical buffer indices sampled

  // Present when the stored transitions carry actor LSTM states.
  bool has_states = false;
  Matrix lstm_in_h, lstm_in_c, lstm_out_h, lstm_out_c;  // batch x H
};

// Fixed-capacity FIFO of transitions that remembers episode boundaries.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100000);

  void push(Transition t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }

  // Logical index 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;
  bool episode_start(std::size_t i) const;

  // Number of same-episode predecessors of logical index i still stored,
  // capped at `limit`.
  std::size_t history_available(std::size_t i, std::size_t limit) const;

  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

  // Builds the batch for explicit indices. With `with_states`, every
  // transition must carry lstm_in/lstm_out.
  HistoryBatch gather(const std::vector<std::size_t>& indices,
                      std::size_t history, bool with_states) const;

  HistoryBatch sample_history(std::size_t batch, std::size_t history,
                              Rng& rng) const;
  // Single-step transitions with their stored actor states (history 0).
  // Throws ConfigError when the annotations are missing.
  HistoryBatch sample_hidden(std::size_t batch, Rng& rng) const;

  // Binary snapshot: little-endian, "RTD3RPLY" magic plus version byte.
  void save(const std::string& path) const;
  static ReplayBuffer load(const std::string& path);

 private:
  std::size_t physical(std::size_t i) const {
    return (head_ + i) % capacity_;
  }

  std::size_t capacity_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::vector<Transition> items_;
  std::vector<std::uint8_t> starts_;
  bool next_is_start_ = true;
};

}  // namespace rtd3
