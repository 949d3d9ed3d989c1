#include "rtd3/policy.hpp"

#include <algorithm>

#include "rtd3/error.hpp"

namespace rtd3 {

RolloutMemory parse_rollout_memory(const std::string& name) {
  if (name == "window") return RolloutMemory::Window;
  if (name == "carried") return RolloutMemory::Carried;
  throw ConfigError("unknown rollout_memory '" + name +
                    "' (expected window or carried)");
}

const char* rollout_memory_name(RolloutMemory m) {
  return m == RolloutMemory::Window ? "window" : "carried";
}

StoredLstmState state_row(const LstmState& s, std::size_t row) {
  const auto h = s.h.row(row);
  const auto c = s.c.row(row);
  return {{h.begin(), h.end()}, {c.begin(), c.end()}};
}

RolloutPolicy::RolloutPolicy(const VariantSpec& variant, RolloutMemory memory,
                             std::size_t envs)
    : variant_(variant), memory_(memory), envs_(envs), episodes_(envs) {
  if (envs == 0) throw ContractViolation("RolloutPolicy: no environments");
  carried_ = LstmState::zeros(envs, variant.hidden);
  next_carried_ = carried_;
}

void RolloutPolicy::begin(std::size_t env) {
  episodes_.at(env) = Episode{};
  std::fill(carried_.h.row(env).begin(), carried_.h.row(env).end(), 0.0);
  std::fill(carried_.c.row(env).begin(), carried_.c.row(env).end(), 0.0);
}

void RolloutPolicy::begin_all() {
  for (std::size_t e = 0; e < envs_; ++e) begin(e);
}

WindowBatch RolloutPolicy::window(const std::vector<Observation>& obs) const {
  if (obs.size() != envs_) {
    throw ContractViolation("RolloutPolicy: observation batch size");
  }
  const std::size_t od = variant_.obs_dim;
  const std::size_t L = variant_.recurrent() ? variant_.history + 1 : 1;
  WindowBatch w;
  w.resize(envs_, L, od);
  for (std::size_t e = 0; e < envs_; ++e) {
    const Episode& ep = episodes_[e];
    if (obs[e].size != od) {
      throw ContractViolation("RolloutPolicy: observation has " +
                              std::to_string(obs[e].size) +
                              " elements, actor expects " +
                              std::to_string(od));
    }
    const std::size_t valid = std::min(ep.past.size(), L - 1);
    w.valid_past[e] = valid;
    const std::size_t skip = ep.past.size() - valid;
    for (std::size_t k = 0; k < valid; ++k) {
      const Step& s = ep.past[skip + k];
      const std::size_t p = L - 1 - valid + k;
      std::copy_n(s.obs.values.begin(), od, w.obs_at(e, p));
      w.prev_act[e * L + p] = s.prev_act;
      w.act[e * L + p] = s.act;
    }
    std::copy_n(obs[e].values.begin(), od, w.obs_at(e, L - 1));
    w.prev_act[e * L + L - 1] = ep.prev_act;
  }
  return w;
}

PolicyDecision RolloutPolicy::decide(const Network& actor,
                                     const std::vector<Observation>& obs,
                                     bool capture) {
  if (capture && variant_.kind != VariantKind::HTd3) {
    throw ContractViolation("only H-TD3 rollouts capture actor states");
  }
  for (std::size_t e = 0; e < envs_; ++e) episodes_[e].pending = obs.at(e);
  if (memory_ == RolloutMemory::Carried && variant_.recurrent()) {
    return decide_carried(actor, obs, capture);
  }
  return decide_window(actor, obs, capture);
}

PolicyDecision RolloutPolicy::decide_window(
    const Network& actor, const std::vector<Observation>& obs, bool capture) {
  const WindowBatch w = window(obs);
  PolicyDecision d;
  Matrix out;
  if (capture) {
    const std::size_t l = w.length - 1;
    const LstmState in =
        actor.encode(sequence_input(w, 0, l, SeqFeatures::ObsPrevAct));
    const LstmState next =
        actor.encode(sequence_input(w, 1, l, SeqFeatures::ObsPrevAct));
    out = actor.forward(seeded_actor_step(w, in));
    for (std::size_t e = 0; e < envs_; ++e) {
      d.lstm_in.push_back(state_row(in, e));
      d.lstm_out.push_back(state_row(next, e));
    }
  } else {
    out = actor.forward(actor_input(variant_, w));
  }
  d.action.assign(out.values().begin(), out.values().end());
  return d;
}

PolicyDecision RolloutPolicy::decide_carried(
    const Network& actor, const std::vector<Observation>& obs, bool capture) {
  const std::size_t od = variant_.obs_dim;
  NetInput in;
  in.steps = 1;
  in.init = carried_;
  if (variant_.kind == VariantKind::LstmTd3) {
    // The history channel absorbs the step that just became history.
    const std::size_t width = od + (variant_.include_action ? 1 : 0);
    in.seq.assign_zero(envs_, width);
    in.mask.assign(envs_, 0);
    in.ff.assign_zero(envs_, od);
    for (std::size_t e = 0; e < envs_; ++e) {
      const Episode& ep = episodes_[e];
      std::copy_n(obs[e].values.begin(), od, in.ff.row(e).begin());
      if (ep.past.empty()) continue;
      const Step& s = ep.past.back();
      in.mask[e] = 1;
      std::copy_n(s.obs.values.begin(), od, in.seq.row(e).begin());
      if (variant_.include_action) in.seq(e, od) = s.act;
    }
  } else {
    in.seq.assign_zero(envs_, od + 1);
    for (std::size_t e = 0; e < envs_; ++e) {
      if (obs[e].size != od) {
        throw ContractViolation("RolloutPolicy: observation size mismatch");
      }
      std::copy_n(obs[e].values.begin(), od, in.seq.row(e).begin());
      in.seq(e, od) = episodes_[e].prev_act;
    }
  }
  NetCache cache;
  const Matrix out = actor.forward(in, &cache);
  next_carried_ = cache.lstm.final;
  PolicyDecision d;
  d.action.assign(out.values().begin(), out.values().end());
  if (capture) {
    for (std::size_t e = 0; e < envs_; ++e) {
      d.lstm_in.push_back(state_row(carried_, e));
      d.lstm_out.push_back(state_row(next_carried_, e));
    }
  }
  return d;
}

void RolloutPolicy::record(std::size_t env, double action) {
  Episode& ep = episodes_.at(env);
  ep.past.push_back({ep.pending, ep.prev_act, action});
  // Only the last l steps are ever read.
  const std::size_t keep = std::max<std::size_t>(variant_.history, 1);
  if (ep.past.size() > keep) ep.past.erase(ep.past.begin());
  ep.prev_act = action;
  ++ep.t;
  if (memory_ == RolloutMemory::Carried && variant_.recurrent()) {
    std::copy_n(next_carried_.h.row(env).begin(), variant_.hidden,
                carried_.h.row(env).begin());
    std::copy_n(next_carried_.c.row(env).begin(), variant_.hidden,
                carried_.c.row(env).begin());
  }
}

}  // namespace rtd3
