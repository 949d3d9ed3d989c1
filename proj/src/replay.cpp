#include "rtd3/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "binary_io.hpp"
#include "rtd3/error.hpp"
#include "rtd3/rng.hpp"

namespace rtd3 {

void WindowBatch::resize(std::size_t b, std::size_t len, std::size_t od) {
  batch = b;
  length = len;
  obs_dim = od;
  obs.assign(b * len * od, 0.0);
  prev_act.assign(b * len, 0.0);
  act.assign(b * len, 0.0);
  valid_past.assign(b, 0);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (!std::isfinite(t.reward) || !std::isfinite(t.act) ||
      !std::isfinite(t.prev_act)) {
    throw ContractViolation("ReplayBuffer::push: non-finite transition");
  }
  const std::uint8_t start = next_is_start_ ? 1 : 0;
  next_is_start_ = t.done;
  if (size_ < capacity_) {
    items_.push_back(std::move(t));
    starts_.push_back(start);
    ++size_;
  } else {
    items_[head_] = std::move(t);
    starts_[head_] = start;
    head_ = (head_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ContractViolation("ReplayBuffer::at: out of range");
  return items_[physical(i)];
}

bool ReplayBuffer::episode_start(std::size_t i) const {
  if (i >= size_) {
    throw ContractViolation("ReplayBuffer::episode_start: out of range");
  }
  // The oldest stored step has no stored predecessor.
  return i == 0 || starts_[physical(i)] != 0;
}

std::size_t ReplayBuffer::history_available(std::size_t i,
                                            std::size_t limit) const {
  std::size_t n = 0;
  while (n < limit && !episode_start(i - n)) ++n;
  return n;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch,
                                                      Rng& rng) const {
  if (batch > size_) {
    throw ContractViolation("ReplayBuffer: batch " + std::to_string(batch) +
                            " exceeds stored " + std::to_string(size_));
  }
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = rng.index(size_);
  return idx;
}

HistoryBatch ReplayBuffer::gather(const std::vector<std::size_t>& indices,
                                  std::size_t history,
                                  bool with_states) const {
  if (indices.empty()) throw ContractViolation("ReplayBuffer: empty batch");
  HistoryBatch out;
  out.batch = indices.size();
  out.history = history;
  out.obs_dim = at(indices.front()).obs.size;
  out.indices = indices;
  const std::size_t B = out.batch;
  const std::size_t L = history + 1;
  const std::size_t od = out.obs_dim;
  out.current.resize(B, L, od);
  out.next.resize(B, L, od);
  out.reward.resize(B);
  out.done.resize(B);
  out.terminal.resize(B);

  std::size_t state_dim = 0;
  if (with_states) {
    const auto& first = at(indices.front());
    if (!first.lstm_in || !first.lstm_out) {
      throw ConfigError(
          "replay: transitions carry no LSTM states (not an H-TD3 buffer)");
    }
    state_dim = first.lstm_in->h.size();
    out.has_states = true;
    out.lstm_in_h.assign_zero(B, state_dim);
    out.lstm_in_c.assign_zero(B, state_dim);
    out.lstm_out_h.assign_zero(B, state_dim);
    out.lstm_out_c.assign_zero(B, state_dim);
  }

  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t i = indices[b];
    const Transition& tr = at(i);
    if (tr.obs.size != od) {
      throw ContractViolation("replay: mixed observation sizes");
    }
    const std::size_t valid = history_available(i, history);
    out.current.valid_past[b] = valid;
    // Positions [L - 1 - valid, L - 1] hold steps i - valid .. i.
    for (std::size_t k = 0; k <= valid; ++k) {
      const Transition& s = at(i - valid + k);
      const std::size_t p = L - 1 - valid + k;
      std::copy_n(s.obs.values.begin(), od, out.current.obs_at(b, p));
      out.current.prev_act[b * L + p] = s.prev_act;
      out.current.act[b * L + p] = s.act;
    }
    // Next window is the current one shifted left by one, ending at t+1.
    const std::size_t next_valid = std::min(valid + 1, history);
    out.next.valid_past[b] = next_valid;
    for (std::size_t p = L - 1 - next_valid; p + 1 < L; ++p) {
      std::copy_n(out.current.obs_at(b, p + 1), od, out.next.obs_at(b, p));
      out.next.prev_act[b * L + p] = out.current.prev_act[b * L + p + 1];
      out.next.act[b * L + p] = out.current.act[b * L + p + 1];
    }
    std::copy_n(tr.next_obs.values.begin(), od, out.next.obs_at(b, L - 1));
    out.next.prev_act[b * L + L - 1] = tr.act;

    out.reward[b] = tr.reward;
    out.done[b] = tr.done ? 1 : 0;
    out.terminal[b] = tr.terminal ? 1 : 0;

    if (with_states) {
      if (!tr.lstm_in || !tr.lstm_out || tr.lstm_in->h.size() != state_dim) {
        throw ConfigError("replay: transition " + std::to_string(i) +
                          " lacks LSTM states");
      }
      std::copy(tr.lstm_in->h.begin(), tr.lstm_in->h.end(),
                out.lstm_in_h.row(b).begin());
      std::copy(tr.lstm_in->c.begin(), tr.lstm_in->c.end(),
                out.lstm_in_c.row(b).begin());
      std::copy(tr.lstm_out->h.begin(), tr.lstm_out->h.end(),
                out.lstm_out_h.row(b).begin());
      std::copy(tr.lstm_out->c.begin(), tr.lstm_out->c.end(),
                out.lstm_out_c.row(b).begin());
    }
  }
  return out;
}

HistoryBatch ReplayBuffer::sample_history(std::size_t batch,
                                          std::size_t history,
                                          Rng& rng) const {
  return gather(sample_indices(batch, rng), history, false);
}

HistoryBatch ReplayBuffer::sample_hidden(std::size_t batch, Rng& rng) const {
  if (size_ > 0 && (!at(0).lstm_in || !at(0).lstm_out)) {
    throw ConfigError(
        "replay: sample_hidden needs transitions with LSTM states");
  }
  return gather(sample_indices(batch, rng), 0, true);
}

// ---- binary snapshot ----

namespace {

constexpr char kMagic[8] = {'R', 'T', 'D', '3', 'R', 'P', 'L', 'Y'};
constexpr std::uint8_t kVersion = 1;
using detail::Reader;
using detail::Writer;

}  // namespace

// Layout: magic[8] version:u8 capacity:u64 count:u64 obs_dim:u64
// state_dim:u64, then per transition (oldest first):
//   obs[obs_dim] act reward next_obs[obs_dim] prev_act  (f64)
//   done:u8 terminal:u8 episode_start:u8
//   if state_dim > 0: lstm_in.h lstm_in.c lstm_out.h lstm_out.c (f64 each)
void ReplayBuffer::save(const std::string& path) const {
  Writer w(path);
  w.bytes(kMagic, sizeof kMagic);
  w.u8(kVersion);
  w.u64(capacity_);
  w.u64(size_);
  const std::size_t od = size_ > 0 ? at(0).obs.size : 0;
  const std::size_t sd =
      size_ > 0 && at(0).lstm_in ? at(0).lstm_in->h.size() : 0;
  w.u64(od);
  w.u64(sd);
  for (std::size_t i = 0; i < size_; ++i) {
    const Transition& t = at(i);
    for (std::size_t k = 0; k < od; ++k) w.f64(t.obs.values[k]);
    w.f64(t.act);
    w.f64(t.reward);
    for (std::size_t k = 0; k < od; ++k) w.f64(t.next_obs.values[k]);
    w.f64(t.prev_act);
    w.u8(t.done ? 1 : 0);
    w.u8(t.terminal ? 1 : 0);
    w.u8(episode_start(i) ? 1 : 0);
    if (sd > 0) {
      for (const auto* s : {&*t.lstm_in, &*t.lstm_out}) {
        for (double v : s->h) w.f64(v);
        for (double v : s->c) w.f64(v);
      }
    }
  }
  w.finish();
}

ReplayBuffer ReplayBuffer::load(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw IoError("'" + path + "' is not a replay snapshot");
  }
  const auto version = r.u8();
  if (version != kVersion) {
    throw IoError("replay snapshot version " + std::to_string(version) +
                  " unsupported");
  }
  const auto capacity = r.u64();
  const auto count = r.u64();
  const auto od = r.u64();
  const auto sd = r.u64();
  if (od > 3 || count > capacity) throw IoError("corrupt replay snapshot");
  ReplayBuffer buf(capacity);
  for (std::uint64_t i = 0; i < count; ++i) {
    Transition t;
    t.obs.size = od;
    t.next_obs.size = od;
    for (std::size_t k = 0; k < od; ++k) t.obs.values[k] = r.f64();
    t.act = r.f64();
    t.reward = r.f64();
    for (std::size_t k = 0; k < od; ++k) t.next_obs.values[k] = r.f64();
    t.prev_act = r.f64();
    t.done = r.u8() != 0;
    t.terminal = r.u8() != 0;
    const bool start = r.u8() != 0;
    if (sd > 0) {
      auto read_state = [&] {
        StoredLstmState s;
        s.h.resize(sd);
        s.c.resize(sd);
        for (auto& v : s.h) v = r.f64();
        for (auto& v : s.c) v = r.f64();
        return s;
      };
      t.lstm_in = read_state();
      t.lstm_out = read_state();
    }
    buf.next_is_start_ = start;
    buf.push(std::move(t));
  }
  return buf;
}

}  // namespace rtd3
