#include "rtd3/agent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rtd3/error.hpp"
#include "rtd3/rng.hpp"

namespace rtd3 {

void Hyperparams::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ConfigError("gamma must lie in [0, 1)");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
  if (policy_delay < 1) throw ConfigError("policy_delay must be >= 1");
  if (target_noise < 0.0 || target_noise_clip < 0.0 ||
      exploration_noise < 0.0) {
    throw ConfigError("noise scales must be non-negative");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (updates_per_step < 1) throw ConfigError("updates_per_step must be >= 1");
  if (!(max_action > 0.0)) throw ConfigError("max_action must be positive");
}

Agent::Agent(const VariantSpec& variant, const Hyperparams& hyper,
             std::uint64_t seed)
    : variant_(variant), hyper_(hyper) {
  variant_.validate();
  hyper_.validate();
  Rng rng = Rng::derive(seed, Stream::Init);
  NetSpec a = actor_spec(variant_);
  a.output_scale = hyper_.max_action;
  actor_ = Network(a, rng);
  for (auto& c : critics_) c = Network(critic_spec(variant_), rng);
  sync_targets();
  reset_optimizers();
}

void Agent::reset_optimizers() {
  actor_opt_ = Adam(actor_.param_count(), {hyper_.actor_lr});
  for (std::size_t i = 0; i < 2; ++i) {
    critic_opt_[i] = Adam(critics_[i].param_count(), {hyper_.critic_lr});
  }
}

void Agent::sync_targets() {
  target_actor_ = actor_;
  target_critics_ = critics_;
}

void Agent::soft_update_targets() {
  polyak_update(target_actor_.params().values(), actor_.params().values(),
                hyper_.tau);
  for (std::size_t i = 0; i < 2; ++i) {
    polyak_update(target_critics_[i].params().values(),
                  critics_[i].params().values(), hyper_.tau);
  }
}

std::size_t Agent::sample_history() const {
  if (variant_.kind == VariantKind::Td3) return 0;
  if (variant_.kind == VariantKind::HTd3 && !hyper_.htd3_sequence_actor) {
    return 0;
  }
  return variant_.history;
}

HistoryBatch Agent::sample(const ReplayBuffer& buffer, Rng& rng) const {
  if (variant_.kind == VariantKind::HTd3) {
    if (!hyper_.htd3_sequence_actor) {
      return buffer.sample_hidden(hyper_.batch_size, rng);
    }
    return buffer.gather(buffer.sample_indices(hyper_.batch_size, rng),
                         variant_.history, true);
  }
  return buffer.sample_history(hyper_.batch_size, sample_history(), rng);
}

namespace {

LstmState stored(const HistoryBatch& b, bool out) {
  if (!b.has_states) {
    throw ContractViolation("H-TD3 update needs stored actor states");
  }
  return out ? LstmState{b.lstm_out_h, b.lstm_out_c}
             : LstmState{b.lstm_in_h, b.lstm_in_c};
}

std::vector<double> anchor_actions(const WindowBatch& w) {
  std::vector<double> a(w.batch);
  for (std::size_t b = 0; b < w.batch; ++b) a[b] = w.act_at(b, w.length - 1);
  return a;
}

std::string describe(const char* what, std::uint64_t update,
                     std::span<const double> q, std::span<const double> y) {
  double max_q = 0.0;
  double max_y = 0.0;
  for (double v : q) max_q = std::max(max_q, std::fabs(v));
  for (double v : y) max_y = std::max(max_y, std::fabs(v));
  std::ostringstream os;
  os << what << " is not finite at update " << update << " (max|Q|=" << max_q
     << ", max|target|=" << max_y << ")";
  return os.str();
}

}  // namespace

NetInput Agent::update_actor_input(const HistoryBatch& batch,
                                   bool next) const {
  const WindowBatch& w = next ? batch.next : batch.current;
  if (variant_.kind == VariantKind::HTd3 &&
      (next || !hyper_.htd3_sequence_actor)) {
    return seeded_actor_step(w, stored(batch, next));
  }
  return actor_input(variant_, w);
}

CriticInput Agent::update_critic_input(const HistoryBatch& batch, bool next,
                                       std::span<const double> action) const {
  const WindowBatch& w = next ? batch.next : batch.current;
  if (variant_.kind == VariantKind::HTd3) {
    return seeded_critic_step(w, action, stored(batch, next));
  }
  return critic_input(variant_, w, action);
}

std::vector<double> Agent::td_targets(const HistoryBatch& batch,
                                      Rng& target_noise_rng) const {
  const std::size_t B = batch.batch;
  const Matrix a_next = target_actor_.forward(update_actor_input(batch, true));
  std::vector<double> action(B);
  const double c = hyper_.target_noise_clip;
  for (std::size_t b = 0; b < B; ++b) {
    const double eps = std::clamp(
        target_noise_rng.normal(0.0, hyper_.target_noise), -c, c);
    action[b] =
        std::clamp(a_next(b, 0) + eps, -hyper_.max_action, hyper_.max_action);
  }
  const CriticInput ci = update_critic_input(batch, true, action);
  const Matrix q1 = target_critics_[0].forward(ci.input);
  const Matrix q2 = target_critics_[1].forward(ci.input);
  std::vector<double> y(B);
  for (std::size_t b = 0; b < B; ++b) {
    const double cont = batch.terminal[b] ? 0.0 : 1.0;
    y[b] = batch.reward[b] + hyper_.gamma * cont * std::min(q1(b, 0), q2(b, 0));
  }
  return y;
}

double Agent::actor_step(const NetInput& actor_in,
                         const ActionGradient& dq_da) {
  NetCache cache;
  const Matrix a = actor_.forward(actor_in, &cache);
  const std::size_t B = a.rows();
  const std::vector<double> g = dq_da(a.values());
  if (g.size() != B) throw ContractViolation("actor_step: gradient size");
  Matrix d_out(B, 1);
  double mean = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    d_out(b, 0) = -g[b] / static_cast<double>(B);
    mean += a(b, 0);
  }
  std::vector<double> grads = actor_.params().zeros_like();
  actor_.backward(actor_in, cache, d_out, grads, nullptr);
  if (!all_finite(grads)) {
    throw NumericFault("actor gradient is not finite at update " +
                       std::to_string(updates_));
  }
  actor_opt_.step(actor_.params().values(), grads);
  return mean / static_cast<double>(B);
}

UpdateStats Agent::update(const HistoryBatch& batch, Rng& target_noise_rng) {
  const std::size_t B = batch.batch;
  if (B == 0) throw ContractViolation("update: empty batch");
  ++updates_;
  UpdateStats stats;
  const std::vector<double> y = td_targets(batch, target_noise_rng);
  for (double v : y) stats.mean_target += v / static_cast<double>(B);

  const std::vector<double> act = anchor_actions(batch.current);
  const CriticInput ci = update_critic_input(batch, false, act);
  for (std::size_t i = 0; i < 2; ++i) {
    NetCache cache;
    const Matrix q = critics_[i].forward(ci.input, &cache);
    Matrix d_out(B, 1);
    double loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      const double diff = q(b, 0) - y[b];
      loss += diff * diff;
      d_out(b, 0) = 2.0 * diff / static_cast<double>(B);
      if (i == 0) stats.mean_q += q(b, 0) / static_cast<double>(B);
    }
    loss /= static_cast<double>(B);
    if (!std::isfinite(loss)) {
      throw NumericFault(describe(i == 0 ? "critic 1 loss" : "critic 2 loss",
                                  updates_, q.values(), y));
    }
    stats.critic_loss[i] = loss;
    std::vector<double> grads = critics_[i].params().zeros_like();
    critics_[i].backward(ci.input, cache, d_out, grads, nullptr);
    critic_opt_[i].step(critics_[i].params().values(), grads);
  }

  if (updates_ % hyper_.policy_delay == 0) {
    double q_mean = 0.0;
    const NetInput ain = update_actor_input(batch, false);
    actor_step(ain, [&](std::span<const double> actions) {
      const CriticInput cq = update_critic_input(batch, false, actions);
      NetCache cache;
      const Matrix q = critics_[0].forward(cq.input, &cache);
      for (std::size_t b = 0; b < B; ++b) q_mean += q(b, 0);
      NetInputGrad d_in;
      const Matrix ones(B, 1, 1.0);
      critics_[0].backward(cq.input, cache, ones, {}, &d_in);
      return action_gradient(cq.slot, d_in, B);
    });
    stats.actor_loss = -q_mean / static_cast<double>(B);
    if (!std::isfinite(stats.actor_loss)) {
      throw NumericFault(describe("actor loss", updates_, {}, y));
    }
    stats.actor_updated = true;
    soft_update_targets();
  }
  return stats;
}

}  // namespace rtd3
