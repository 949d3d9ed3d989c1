#include "rtd3/variant.hpp"

#include <algorithm>

#include "rtd3/error.hpp"

namespace rtd3 {

namespace {
constexpr double kMaxTorque = 2.0;
}

VariantSpec VariantSpec::parse(const std::string& name) {
  VariantSpec v;
  if (name == "td3") {
    v.kind = VariantKind::Td3;
  } else if (name == "lstm_td3") {
    v.kind = VariantKind::LstmTd3;
  } else if (name == "lstm_td3_noact") {
    v.kind = VariantKind::LstmTd3;
    v.include_action = false;
  } else if (name == "lstm_td3_1ha1hc") {
    v.kind = VariantKind::Lstm1ha1hc;
  } else if (name == "lstm_td3_1ha2hc") {
    v.kind = VariantKind::Lstm1ha2hc;
  } else if (name == "htd3") {
    v.kind = VariantKind::HTd3;
  } else {
    throw ConfigError("unknown variant '" + name + "'");
  }
  return v;
}

std::string VariantSpec::name() const {
  switch (kind) {
    case VariantKind::Td3:
      return "td3";
    case VariantKind::LstmTd3:
      return include_action ? "lstm_td3" : "lstm_td3_noact";
    case VariantKind::Lstm1ha1hc:
      return "lstm_td3_1ha1hc";
    case VariantKind::Lstm1ha2hc:
      return "lstm_td3_1ha2hc";
    case VariantKind::HTd3:
      return "htd3";
  }
  return "unknown";
}

void VariantSpec::validate() const {
  if (act_dim != 1) throw ConfigError("only act_dim = 1 is supported");
  if (obs_dim == 0 || obs_dim > 3) throw ConfigError("obs_dim must be 1..3");
  if (hidden == 0) throw ConfigError("hidden width must be positive");
  if (recurrent() && history < 1) {
    throw ConfigError("recurrent variants need history length l >= 1");
  }
}

NetSpec actor_spec(const VariantSpec& v) {
  NetSpec s;
  s.hidden = v.hidden;
  s.tanh_output = true;
  s.output_scale = kMaxTorque;
  switch (v.kind) {
    case VariantKind::Td3:
      s.ff_in = v.obs_dim;
      break;
    case VariantKind::LstmTd3:
      s.seq_in = v.obs_dim + (v.include_action ? v.act_dim : 0);
      s.ff_in = v.obs_dim;
      break;
    case VariantKind::Lstm1ha1hc:
    case VariantKind::Lstm1ha2hc:
    case VariantKind::HTd3:
      s.seq_in = v.obs_dim + v.act_dim;
      break;
  }
  return s;
}

NetSpec critic_spec(const VariantSpec& v) {
  NetSpec s;
  s.hidden = v.hidden;
  switch (v.kind) {
    case VariantKind::Td3:
      s.ff_in = v.obs_dim + v.act_dim;
      break;
    case VariantKind::LstmTd3:
      s.seq_in = v.obs_dim + (v.include_action ? v.act_dim : 0);
      s.ff_in = v.obs_dim + v.act_dim;
      break;
    case VariantKind::Lstm1ha1hc:
    case VariantKind::HTd3:
      s.seq_in = v.obs_dim + v.act_dim;
      break;
    case VariantKind::Lstm1ha2hc:
      s.seq_in = v.obs_dim + v.act_dim;
      s.ff_in = v.act_dim;
      break;
  }
  return s;
}

NetInput sequence_input(const WindowBatch& w, std::size_t first,
                        std::size_t count, SeqFeatures features,
                        std::span<const double> last_action) {
  if (count == 0 || first + count > w.length) {
    throw ContractViolation("sequence_input: positions outside the window");
  }
  if (!last_action.empty() && last_action.size() != w.batch) {
    throw ContractViolation("sequence_input: action batch size");
  }
  const std::size_t B = w.batch;
  const std::size_t od = w.obs_dim;
  const std::size_t width = od + (features == SeqFeatures::Obs ? 0 : 1);
  NetInput in;
  in.steps = count;
  in.seq.assign_zero(count * B, width);
  in.mask.assign(count * B, 0);
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t p = first + t;
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t row = t * B + b;
      if (!w.valid(b, p)) continue;
      in.mask[row] = 1;
      double* dst = in.seq.row(row).data();
      std::copy_n(w.obs_at(b, p), od, dst);
      if (features == SeqFeatures::ObsPrevAct) {
        dst[od] = w.prev_act_at(b, p);
      } else if (features == SeqFeatures::ObsAct) {
        dst[od] = (p + 1 == w.length && !last_action.empty())
                      ? last_action[b]
                      : w.act_at(b, p);
      }
    }
  }
  return in;
}

namespace {

Matrix current_obs(const WindowBatch& w) {
  Matrix m(w.batch, w.obs_dim);
  for (std::size_t b = 0; b < w.batch; ++b) {
    std::copy_n(w.obs_at(b, w.length - 1), w.obs_dim, m.row(b).data());
  }
  return m;
}

Matrix obs_action(const WindowBatch& w, std::span<const double> action) {
  Matrix m(w.batch, w.obs_dim + 1);
  for (std::size_t b = 0; b < w.batch; ++b) {
    std::copy_n(w.obs_at(b, w.length - 1), w.obs_dim, m.row(b).data());
    m(b, w.obs_dim) = action[b];
  }
  return m;
}

void check_action(const WindowBatch& w, std::span<const double> action) {
  if (action.size() != w.batch) {
    throw ContractViolation("critic input: action batch size");
  }
}

}  // namespace

NetInput actor_input(const VariantSpec& v, const WindowBatch& w) {
  if (w.obs_dim != v.obs_dim) {
    throw ContractViolation("actor input: observation dimension " +
                            std::to_string(w.obs_dim) + " != " +
                            std::to_string(v.obs_dim));
  }
  switch (v.kind) {
    case VariantKind::Td3: {
      NetInput in;
      in.ff = current_obs(w);
      return in;
    }
    case VariantKind::LstmTd3: {
      if (w.length < 2) {
        throw ContractViolation("LSTM-TD3 needs at least one history slot");
      }
      NetInput in = sequence_input(
          w, 0, w.length - 1,
          v.include_action ? SeqFeatures::ObsAct : SeqFeatures::Obs);
      in.ff = current_obs(w);
      return in;
    }
    case VariantKind::Lstm1ha1hc:
    case VariantKind::Lstm1ha2hc:
    case VariantKind::HTd3:
      return sequence_input(w, 0, w.length, SeqFeatures::ObsPrevAct);
  }
  throw ContractViolation("actor input: unknown variant");
}

CriticInput critic_input(const VariantSpec& v, const WindowBatch& w,
                         std::span<const double> action) {
  check_action(w, action);
  if (w.obs_dim != v.obs_dim) {
    throw ContractViolation("critic input: observation dimension mismatch");
  }
  const std::size_t B = w.batch;
  CriticInput ci;
  switch (v.kind) {
    case VariantKind::Td3:
      ci.input.ff = obs_action(w, action);
      ci.slot = {false, 0, v.obs_dim};
      break;
    case VariantKind::LstmTd3:
      if (w.length < 2) {
        throw ContractViolation("LSTM-TD3 needs at least one history slot");
      }
      ci.input = sequence_input(
          w, 0, w.length - 1,
          v.include_action ? SeqFeatures::ObsAct : SeqFeatures::Obs);
      ci.input.ff = obs_action(w, action);
      ci.slot = {false, 0, v.obs_dim};
      break;
    case VariantKind::Lstm1ha1hc:
      ci.input = sequence_input(w, 0, w.length, SeqFeatures::ObsAct, action);
      ci.slot = {true, (w.length - 1) * B, v.obs_dim};
      break;
    case VariantKind::Lstm1ha2hc:
      ci.input = sequence_input(w, 0, w.length, SeqFeatures::ObsPrevAct);
      ci.input.ff = Matrix(B, 1, std::vector<double>(action.begin(),
                                                      action.end()));
      ci.slot = {false, 0, 0};
      break;
    case VariantKind::HTd3: {
      // Replayed form: the actor stream for past steps, then (o_t, a_t).
      ci.input = sequence_input(w, 0, w.length, SeqFeatures::ObsPrevAct);
      const std::size_t last = (w.length - 1) * B;
      for (std::size_t b = 0; b < B; ++b) {
        ci.input.seq(last + b, v.obs_dim) = action[b];
      }
      ci.slot = {true, last, v.obs_dim};
      break;
    }
  }
  return ci;
}

NetInput seeded_actor_step(const WindowBatch& w, LstmState seed) {
  NetInput in = sequence_input(w, w.length - 1, 1, SeqFeatures::ObsPrevAct);
  in.init = std::move(seed);
  return in;
}

CriticInput seeded_critic_step(const WindowBatch& w,
                               std::span<const double> action,
                               LstmState seed) {
  check_action(w, action);
  CriticInput ci;
  ci.input = sequence_input(w, w.length - 1, 1, SeqFeatures::ObsAct, action);
  ci.input.init = std::move(seed);
  ci.slot = {true, 0, w.obs_dim};
  return ci;
}

std::vector<double> action_gradient(const ActionSlot& slot,
                                    const NetInputGrad& grad,
                                    std::size_t batch) {
  const Matrix& src = slot.in_sequence ? grad.seq : grad.ff;
  if (src.rows() < slot.row_offset + batch || src.cols() <= slot.col) {
    throw ContractViolation("action_gradient: input gradient missing");
  }
  std::vector<double> out(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    out[b] = src(slot.row_offset + b, slot.col);
  }
  return out;
}

}  // namespace rtd3
