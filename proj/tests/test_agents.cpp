#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rtd3/agent.hpp"
#include "rtd3/error.hpp"
#include "rtd3/pendulum.hpp"
#include "rtd3/policy.hpp"
#include "rtd3/replay.hpp"
#include "rtd3/rng.hpp"
#include "rtd3/variant.hpp"

using namespace rtd3;

namespace {

const char* const kVariants[] = {"td3",
                                 "lstm_td3",
                                 "lstm_td3_noact",
                                 "lstm_td3_1ha1hc",
                                 "lstm_td3_1ha2hc",
                                 "htd3"};

VariantSpec small(const char* name, std::size_t history = 3,
                  std::size_t hidden = 16) {
  VariantSpec v = VariantSpec::parse(name);
  v.history = history;
  v.hidden = hidden;
  return v;
}

Hyperparams small_hyper() {
  Hyperparams h;
  h.batch_size = 16;
  return h;
}

// Episodes of the plain pendulum under a wide random behavior policy,
// recorded the way training does (actor states captured for H-TD3).
ReplayBuffer fill_buffer(const Agent& agent, std::size_t episodes,
                         std::size_t length, std::uint64_t seed) {
  ReplayBuffer buffer(10000);
  const bool capture = agent.uses_stored_states();
  RolloutPolicy policy(agent.variant(), RolloutMemory::Window, 1);
  Rng rng(seed);
  for (std::size_t e = 0; e < episodes; ++e) {
    Pendulum env(PendulumParams{.horizon = length});
    std::vector<Observation> obs{env.reset(rng)};
    policy.begin(0);
    double prev = 0.0;
    bool done = false;
    while (!done) {
      PolicyDecision d;
      if (capture) d = policy.decide(agent.actor(), obs, true);
      const double a = rng.uniform(-2.0, 2.0);
      const auto s = env.step(a);
      Transition tr;
      tr.obs = obs[0];
      tr.act = a;
      tr.reward = s.reward;
      tr.next_obs = observe(s.next);
      tr.done = s.done;
      tr.prev_act = prev;
      if (capture) {
        tr.lstm_in = d.lstm_in[0];
        tr.lstm_out = d.lstm_out[0];
      }
      buffer.push(tr);
      policy.record(0, a);
      prev = a;
      obs[0] = tr.next_obs;
      done = s.done;
    }
  }
  return buffer;
}

std::vector<double> flat(const Network& n) {
  return {n.params().values().begin(), n.params().values().end()};
}

// All weights zero and the output bias set: the critic returns `q`.
void constant_output(Network& net, double q) {
  auto v = net.params().values();
  std::fill(v.begin(), v.end(), 0.0);
  v.back() = q;  // output bias is the last parameter
}

}  // namespace

TEST_CASE("td target takes the smaller target critic") {
  for (const char* name : kVariants) {
    Agent agent(small(name), small_hyper(), 1);
    constant_output(agent.target_critic(0), -5.0);
    constant_output(agent.target_critic(1), -3.0);
    auto buffer = fill_buffer(agent, 2, 30, 3);
    Rng rng(4), noise(5);
    auto batch = agent.sample(buffer, rng);
    auto y = agent.td_targets(batch, noise);
    CAPTURE(name);
    for (std::size_t b = 0; b < batch.batch; ++b) {
      CHECK(y[b] == doctest::Approx(batch.reward[b] - 0.99 * 5.0)
                        .epsilon(1e-14));
    }
    // Swapping roles gives the same minimum.
    constant_output(agent.target_critic(0), -3.0);
    constant_output(agent.target_critic(1), -5.0);
    auto y2 = agent.td_targets(batch, noise);
    CHECK(y2 == y);
  }
}

TEST_CASE("zero discount targets the reward") {
  Hyperparams h = small_hyper();
  h.gamma = 0.0;
  Agent agent(small("lstm_td3"), h, 2);
  auto buffer = fill_buffer(agent, 2, 30, 3);
  Rng rng(4), noise(5);
  auto batch = agent.sample(buffer, rng);
  auto y = agent.td_targets(batch, noise);
  for (std::size_t b = 0; b < batch.batch; ++b) CHECK(y[b] == batch.reward[b]);
}

TEST_CASE("terminal transitions do not bootstrap") {
  Agent agent(small("td3"), small_hyper(), 2);
  constant_output(agent.target_critic(0), 7.0);
  constant_output(agent.target_critic(1), 7.0);
  auto buffer = fill_buffer(agent, 1, 20, 3);
  auto batch = buffer.gather({0, 1, 2, 3}, 0, false);
  batch.terminal[1] = 1;
  Rng noise(1);
  auto y = agent.td_targets(batch, noise);
  CHECK(y[0] == doctest::Approx(batch.reward[0] + 0.99 * 7.0));
  CHECK(y[1] == batch.reward[1]);
}

TEST_CASE("targets start equal and lag behind with polyak averaging") {
  Agent agent(small("lstm_td3_1ha2hc"), small_hyper(), 3);
  CHECK(flat(agent.actor()) == flat(agent.target_actor()));
  CHECK(flat(agent.critic(1)) == flat(agent.target_critic(1)));
  auto buffer = fill_buffer(agent, 3, 40, 4);
  Rng rng(5), noise(6);

  const auto actor0 = flat(agent.actor());
  const auto target_critic0 = flat(agent.target_critic(0));
  auto s1 = agent.update(agent.sample(buffer, rng), noise);
  // Critic-only update: actor and every target untouched.
  CHECK_FALSE(s1.actor_updated);
  CHECK(flat(agent.actor()) == actor0);
  CHECK(flat(agent.target_critic(0)) == target_critic0);
  CHECK(flat(agent.critic(0)) != target_critic0);

  auto s2 = agent.update(agent.sample(buffer, rng), noise);
  CHECK(s2.actor_updated);
  CHECK(flat(agent.actor()) != actor0);
  const auto critic = flat(agent.critic(0));
  const auto target = flat(agent.target_critic(0));
  double worst = 0.0;
  for (std::size_t i = 0; i < critic.size(); ++i) {
    const double expected = 0.005 * critic[i] + 0.995 * target_critic0[i];
    worst = std::max(worst, std::abs(target[i] - expected));
  }
  CHECK(worst < 1e-15);
}

TEST_CASE("actor and targets change only on delayed updates") {
  Hyperparams h = small_hyper();
  h.policy_delay = 3;
  Agent agent(small("htd3"), h, 7);
  auto buffer = fill_buffer(agent, 3, 40, 8);
  Rng rng(1), noise(2);
  auto actor = flat(agent.actor());
  auto target = flat(agent.target_actor());
  for (int k = 1; k <= 9; ++k) {
    auto s = agent.update(agent.sample(buffer, rng), noise);
    const bool due = k % 3 == 0;
    CAPTURE(k);
    CHECK(s.actor_updated == due);
    CHECK((flat(agent.actor()) != actor) == due);
    CHECK((flat(agent.target_actor()) != target) == due);
    actor = flat(agent.actor());
    target = flat(agent.target_actor());
  }
  CHECK(agent.update_count() == 9);
}

TEST_CASE("actions stay within bounds") {
  for (const char* name : kVariants) {
    Agent agent(small(name), small_hyper(), 11);
    // Scale every weight up so the tanh head saturates.
    for (auto& p : agent.actor().params().values()) p *= 50.0;
    RolloutPolicy policy(agent.variant(), RolloutMemory::Window, 4);
    policy.begin_all();
    Rng rng(3);
    std::vector<Observation> obs(4);
    for (int t = 0; t < 12; ++t) {
      for (auto& o : obs) {
        for (auto& v : o.values) v = rng.uniform(-100.0, 100.0);
      }
      auto d = policy.decide(agent.actor(), obs, agent.uses_stored_states());
      for (std::size_t e = 0; e < 4; ++e) {
        CHECK(std::abs(d.action[e]) <= 2.0);
        policy.record(e, d.action[e]);
      }
    }
  }
}

TEST_CASE("zero weights give zero actions and values") {
  for (const char* name : kVariants) {
    VariantSpec v = small(name);
    Agent agent(v, small_hyper(), 1);
    for (auto& p : agent.actor().params().values()) p = 0.0;
    constant_output(agent.critic(0), 0.0);
    auto buffer = fill_buffer(agent, 1, 20, 2);
    auto batch = buffer.gather({0, 5, 10}, agent.sample_history(),
                               agent.uses_stored_states());
    auto a = agent.actor().forward(agent.update_actor_input(batch, false));
    for (double x : a.values()) CHECK(x == 0.0);
    std::vector<double> act{0.5, -1.0, 2.0};
    auto ci = critic_input(v, batch.current, act);
    auto q = agent.critic(0).forward(ci.input);
    for (double x : q.values()) CHECK(x == 0.0);
  }
}

TEST_CASE("state-seeded step equals the replayed sequence") {
  // Stored states produced by the same weights: one step from the state
  // must reproduce the full replay from a zero state.
  VariantSpec v = small("htd3", 5, 16);
  Agent agent(v, small_hyper(), 21);
  auto buffer = fill_buffer(agent, 3, 25, 22);
  std::vector<std::size_t> idx(buffer.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto batch = buffer.gather(idx, v.history, false);
  const WindowBatch& w = batch.current;
  const std::size_t l = v.history;

  Rng rng(5);
  std::vector<double> act(batch.batch);
  for (auto& a : act) a = rng.uniform(-2.0, 2.0);

  for (std::size_t i = 0; i < 2; ++i) {
    const Network& critic = agent.critic(i);
    const LstmState state =
        critic.encode(sequence_input(w, 0, l, SeqFeatures::ObsPrevAct));
    auto seeded = critic.forward(seeded_critic_step(w, act, state).input);
    auto replay = critic.forward(critic_input(v, w, act).input);
    CHECK(max_abs_diff(seeded, replay) < 1e-10);
  }

  const LstmState state =
      agent.actor().encode(sequence_input(w, 0, l, SeqFeatures::ObsPrevAct));
  auto seeded = agent.actor().forward(seeded_actor_step(w, state));
  auto replay = agent.actor().forward(actor_input(v, w));
  CHECK(max_abs_diff(seeded, replay) < 1e-10);
}

TEST_CASE("captured actor states chain from step to step") {
  VariantSpec v = small("htd3", 4, 16);
  Agent agent(v, small_hyper(), 5);
  auto buffer = fill_buffer(agent, 2, 30, 6);
  for (std::size_t i = 0; i + 1 < buffer.size(); ++i) {
    const auto& a = buffer.at(i);
    const auto& b = buffer.at(i + 1);
    if (a.done) {
      // A new episode starts from the zero state.
      for (double x : b.lstm_in->h) CHECK(x == 0.0);
      continue;
    }
    for (std::size_t j = 0; j < v.hidden; ++j) {
      CHECK(std::abs(a.lstm_out->h[j] - b.lstm_in->h[j]) < 1e-12);
      CHECK(std::abs(a.lstm_out->c[j] - b.lstm_in->c[j]) < 1e-12);
    }
  }
}

TEST_CASE("one-step variant matches H-TD3 at episode start") {
  VariantSpec one = small("lstm_td3_1ha1hc", 3, 16);
  VariantSpec h = small("htd3", 3, 16);
  Rng init(9);
  Network critic(critic_spec(one), init);
  Network actor(actor_spec(one), init);
  Network h_critic(critic_spec(h));
  Network h_actor(actor_spec(h));
  REQUIRE(h_critic.param_count() == critic.param_count());
  std::copy(critic.params().values().begin(), critic.params().values().end(),
            h_critic.params().values().begin());
  std::copy(actor.params().values().begin(), actor.params().values().end(),
            h_actor.params().values().begin());

  // First steps of five episodes: no history at all.
  ReplayBuffer buffer(100);
  Rng rng(2);
  for (int e = 0; e < 5; ++e) {
    Transition t;
    PendulumState s = pendulum_reset(rng);
    t.obs = observe(s);
    t.act = rng.uniform(-2, 2);
    t.next_obs = observe(pendulum_step(s, t.act).next);
    t.done = true;
    buffer.push(t);
  }
  auto batch = buffer.gather({0, 1, 2, 3, 4}, 3, false);
  std::vector<double> act{0.1, -0.2, 1.5, -2.0, 0.0};
  const LstmState zero = LstmState::zeros(5, 16);
  auto q_one = critic.forward(critic_input(one, batch.current, act).input);
  auto q_h = h_critic.forward(seeded_critic_step(batch.current, act, zero).input);
  CHECK(max_abs_diff(q_one, q_h) < 1e-12);
  auto a_one = actor.forward(actor_input(one, batch.current));
  auto a_h = h_actor.forward(seeded_actor_step(batch.current, zero));
  CHECK(max_abs_diff(a_one, a_h) < 1e-12);
}

TEST_CASE("carried and windowed memory agree inside the window") {
  for (const char* name : {"lstm_td3", "lstm_td3_1ha1hc", "lstm_td3_1ha2hc"}) {
    VariantSpec v = small(name, 6, 16);
    Rng init(3);
    Network actor(actor_spec(v), init);
    RolloutPolicy window(v, RolloutMemory::Window, 2);
    RolloutPolicy carried(v, RolloutMemory::Carried, 2);
    window.begin_all();
    carried.begin_all();
    Rng rng(4);
    // Steps 0..l: the window still covers the whole episode.
    for (std::size_t t = 0; t <= v.history; ++t) {
      std::vector<Observation> obs(2);
      for (auto& o : obs) o = observe(pendulum_reset(rng));
      auto dw = window.decide(actor, obs, false);
      auto dc = carried.decide(actor, obs, false);
      CAPTURE(name);
      CAPTURE(t);
      for (std::size_t e = 0; e < 2; ++e) {
        CHECK(std::abs(dw.action[e] - dc.action[e]) < 1e-12);
        const double a = rng.uniform(-2, 2);
        window.record(e, a);
        carried.record(e, a);
      }
    }
  }
}

TEST_CASE("window decisions are the deterministic actor output") {
  for (const char* name : kVariants) {
    VariantSpec v = small(name);
    Rng init(8);
    Network actor(actor_spec(v), init);
    RolloutPolicy policy(v, RolloutMemory::Window, 3);
    policy.begin_all();
    Rng rng(1);
    for (int t = 0; t < 6; ++t) {
      std::vector<Observation> obs(3);
      for (auto& o : obs) o = observe(pendulum_reset(rng));
      auto d = policy.decide(actor, obs, false);
      auto expect = actor.forward(actor_input(v, policy.window(obs)));
      for (std::size_t e = 0; e < 3; ++e) {
        CHECK(d.action[e] == expect(e, 0));
        policy.record(e, d.action[e]);
      }
    }
  }
}

TEST_CASE("actor ascends a supplied action gradient") {
  // Q(a) = -a^2 has its maximum at a = 0.
  for (const char* name : {"td3", "lstm_td3", "htd3"}) {
    Hyperparams h = small_hyper();
    Agent agent(small(name, 2, 16), h, 4);
    auto buffer = fill_buffer(agent, 2, 30, 9);
    auto batch = buffer.gather({3, 8, 13, 20, 27, 33, 41, 55}, agent.sample_history(),
                               agent.uses_stored_states());
    const NetInput in = agent.update_actor_input(batch, false);
    auto grad = [](std::span<const double> a) {
      std::vector<double> g(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) g[i] = -2.0 * a[i];
      return g;
    };
    // Push the actor away from zero first so there is something to undo.
    auto away = [](std::span<const double> a) {
      return std::vector<double>(a.size(), 1.0);
    };
    for (int k = 0; k < 30; ++k) agent.actor_step(in, away);
    auto mean_sq = [&] {
      auto a = agent.actor().forward(in);
      double s = 0.0;
      for (double x : a.values()) s += x * x;
      return s / a.size();
    };
    const double before = mean_sq();
    for (int k = 0; k < 300; ++k) agent.actor_step(in, grad);
    const double after = mean_sq();
    CAPTURE(name);
    CHECK(before > 0.1);
    CHECK(after < 0.01 * before);
  }
}

TEST_CASE("h-td3 updates need stored states") {
  Agent agent(small("htd3"), small_hyper(), 1);
  Agent plain(small("lstm_td3"), small_hyper(), 1);
  auto buffer = fill_buffer(plain, 1, 30, 2);
  Rng rng(1), noise(1);
  CHECK_THROWS_AS(agent.sample(buffer, rng), ConfigError);
  auto batch = buffer.gather({1, 2, 3}, 0, false);
  CHECK_THROWS(agent.update(batch, noise));
}

TEST_CASE("invalid hyperparameters are rejected") {
  Hyperparams h;
  h.tau = 1.5;
  CHECK_THROWS_AS(h.validate(), ConfigError);
  h = {};
  h.policy_delay = 0;
  CHECK_THROWS_AS(h.validate(), ConfigError);
  h = {};
  h.gamma = 1.0;
  CHECK_THROWS_AS(h.validate(), ConfigError);
  h = {};
  h.batch_size = 0;
  CHECK_THROWS_AS(h.validate(), ConfigError);
  CHECK_THROWS_AS(VariantSpec::parse("ddpg"), ConfigError);
}

TEST_CASE("agent construction is deterministic per seed") {
  Agent a(small("lstm_td3"), small_hyper(), 5);
  Agent b(small("lstm_td3"), small_hyper(), 5);
  Agent c(small("lstm_td3"), small_hyper(), 6);
  CHECK(flat(a.actor()) == flat(b.actor()));
  CHECK(flat(a.critic(1)) == flat(b.critic(1)));
  CHECK(flat(a.actor()) != flat(c.actor()));
  CHECK(flat(a.critic(0)) != flat(a.critic(1)));
}
