#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "rtd3/error.hpp"
#include "rtd3/gradcheck.hpp"
#include "rtd3/layers.hpp"
#include "rtd3/netcheck.hpp"
#include "rtd3/network.hpp"
#include "rtd3/optim.hpp"
#include "rtd3/rng.hpp"
#include "rtd3/variant.hpp"

using namespace rtd3;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng,
                     double scale = 1.0) {
  Matrix m(r, c);
  for (auto& x : m.values()) x = rng.uniform(-scale, scale);
  return m;
}

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Plain scalar-loop LSTM written straight from the gate equations, kept
// independent of the layer implementation.
void oracle_lstm(const ParameterSet& ps, const Lstm& lstm,
                 const Matrix& xs, std::size_t steps,
                 const std::vector<std::uint8_t>& mask, std::vector<double> h,
                 std::vector<double> c, std::vector<double>& h_all) {
  const std::size_t H = lstm.hidden();
  const std::size_t in = lstm.in();
  const std::size_t batch = xs.rows() / steps;
  const auto w_ih = ps.value(lstm.w_ih_slot());
  const auto w_hh = ps.value(lstm.w_hh_slot());
  const auto b_ih = ps.value(lstm.b_ih_slot());
  const auto b_hh = ps.value(lstm.b_hh_slot());
  h_all.assign(steps * batch * H, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t row = t * batch + b;
      double* hb = h.data() + b * H;
      double* cb = c.data() + b * H;
      if (mask.empty() || mask[row]) {
        std::vector<double> z(4 * H);
        for (std::size_t g = 0; g < 4 * H; ++g) {
          double s = b_ih(0, g) + b_hh(0, g);
          for (std::size_t j = 0; j < in; ++j) s += w_ih(g, j) * xs(row, j);
          for (std::size_t j = 0; j < H; ++j) s += w_hh(g, j) * hb[j];
          z[g] = s;
        }
        for (std::size_t j = 0; j < H; ++j) {
          const double i = sig(z[j]);
          const double f = sig(z[H + j]);
          const double gg = std::tanh(z[2 * H + j]);
          const double o = sig(z[3 * H + j]);
          cb[j] = f * cb[j] + i * gg;
          hb[j] = o * std::tanh(cb[j]);
        }
      }
      for (std::size_t j = 0; j < H; ++j) h_all[row * H + j] = hb[j];
    }
  }
}

}  // namespace

TEST_CASE("linear layer forward") {
  ParameterSet ps;
  Linear lin(ps, "l", 3, 128);
  CHECK(ps.size() == 512);
  CHECK(Linear::param_count(3, 128) == 512);

  ParameterSet small;
  Linear id(small, "id", 3, 3);
  auto w = small.value(id.weight_slot());
  for (std::size_t i = 0; i < 3; ++i) w(i, i) = 1.0;
  Matrix x(2, 3, {1.0, -2.0, 3.5, 0.0, 4.0, -1.0});
  CHECK(id.forward(small, x) == x);

  for (auto& v : small.values()) v = 0.0;
  auto b = small.value(id.bias_slot());
  b(0, 1) = 0.25;
  Matrix y = id.forward(small, x);
  CHECK(y(0, 0) == 0.0);
  CHECK(y(1, 1) == 0.25);
}

TEST_CASE("linear chain gradient equals analytic product") {
  Rng rng(4);
  ParameterSet ps;
  Linear a(ps, "a", 4, 5);
  Linear b(ps, "b", 5, 2);
  a.init(ps, rng);
  b.init(ps, rng);
  Matrix x = random_matrix(3, 4, rng);
  Matrix dy = random_matrix(3, 2, rng);

  Matrix h = a.forward(ps, x);
  Matrix dh, dx;
  b.backward(ps, {}, h, dy, &dh);
  a.backward(ps, {}, x, dh, &dx);

  // dx = dy W_b W_a
  const auto wa = ps.value(a.weight_slot());
  const auto wb = ps.value(b.weight_slot());
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t j = 0; j < 4; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 5; ++k) {
        double t = 0.0;
        for (std::size_t o = 0; o < 2; ++o) t += dy(r, o) * wb(o, k);
        s += t * wa(k, j);
      }
      CHECK(dx(r, j) == doctest::Approx(s).epsilon(1e-12));
    }
  }
}

TEST_CASE("lstm matches scalar oracle") {
  Rng rng(7);
  for (std::size_t steps : {1u, 4u, 9u}) {
    ParameterSet ps;
    Lstm lstm(ps, "lstm", 5, 6);
    lstm.init(ps, rng);
    const std::size_t batch = 3;
    Matrix xs = random_matrix(steps * batch, 5, rng, 2.0);
    LstmState init{random_matrix(batch, 6, rng), random_matrix(batch, 6, rng)};
    std::vector<std::uint8_t> mask(steps * batch, 1);
    // Sample 1 front-padded by one step, sample 2 by two steps.
    for (std::size_t t = 0; t < steps; ++t) {
      if (t < 1) mask[t * batch + 1] = 0;
      if (t < 2) mask[t * batch + 2] = 0;
    }

    LstmCache cache = lstm.forward(ps, xs, steps, mask, init);
    std::vector<double> expected;
    oracle_lstm(ps, lstm, xs, steps, mask,
                {init.h.values().begin(), init.h.values().end()},
                {init.c.values().begin(), init.c.values().end()}, expected);
    double worst = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      worst = std::max(worst, std::abs(expected[i] - cache.hidden.values()[i]));
    }
    CAPTURE(steps);
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("lstm zero weights give zero output") {
  ParameterSet ps;
  Lstm lstm(ps, "lstm", 3, 4);
  Rng rng(1);
  Matrix xs = random_matrix(10, 3, rng);
  auto cache = lstm.forward(ps, xs, 5, {}, LstmState::zeros(2, 4));
  for (double v : cache.hidden.values()) CHECK(v == 0.0);
}

TEST_CASE("lstm carried state equals full-sequence pass") {
  Rng rng(9);
  ParameterSet ps;
  Lstm lstm(ps, "lstm", 3, 5);
  lstm.init(ps, rng);
  const std::size_t steps = 6, batch = 2;
  Matrix xs = random_matrix(steps * batch, 3, rng);
  auto full = lstm.forward(ps, xs, steps, {}, LstmState::zeros(batch, 5));

  LstmState s = LstmState::zeros(batch, 5);
  for (std::size_t t = 0; t < steps; ++t) {
    s = lstm.step(ps, row_block(xs.view(), t * batch, batch), s);
  }
  CHECK(s == full.final);

  // Splitting the sequence and carrying the state is exact too.
  auto first = lstm.forward(ps, row_block(xs.view(), 0, 2 * batch), 2, {},
                            LstmState::zeros(batch, 5));
  auto rest = lstm.forward(ps, row_block(xs.view(), 2 * batch, 4 * batch), 4,
                           {}, first.final);
  CHECK(rest.final == full.final);
}

TEST_CASE("lstm fully masked sequence keeps the initial state") {
  Rng rng(2);
  ParameterSet ps;
  Lstm lstm(ps, "lstm", 2, 3);
  lstm.init(ps, rng);
  LstmState init{random_matrix(1, 3, rng), random_matrix(1, 3, rng)};
  std::vector<std::uint8_t> mask(4, 0);
  auto cache = lstm.forward(ps, random_matrix(4, 2, rng), 4, mask, init);
  CHECK(cache.final == init);
}

TEST_CASE("lstm rejects empty sequences") {
  ParameterSet ps;
  Lstm lstm(ps, "lstm", 2, 3);
  CHECK_THROWS_AS(lstm.forward(ps, Matrix(0, 2).view(), 0, {},
                               LstmState::zeros(0, 3)),
                  ContractViolation);
}

TEST_CASE("lstm reports non-finite outputs") {
  ParameterSet ps;
  Lstm lstm(ps, "enc", 2, 3);
  Matrix xs(3, 2, 0.0);
  for (auto& v : ps.values()) v = 0.1;
  xs(1, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    lstm.forward(ps, xs, 3, {}, LstmState::zeros(1, 3));
    FAIL("expected NumericFault");
  } catch (const NumericFault& e) {
    const std::string msg = e.what();
    CHECK(msg.find("enc") != std::string::npos);
    CHECK(msg.find("step 1") != std::string::npos);
  }
}

TEST_CASE("lstm bptt passes gradient check") {
  Rng rng(21);
  for (bool masked : {false, true}) {
    ParameterSet ps;
    Lstm lstm(ps, "lstm", 3, 4);
    lstm.init(ps, rng);
    const std::size_t steps = 4, batch = 2;
    Matrix xs = random_matrix(steps * batch, 3, rng);
    LstmState init{random_matrix(batch, 4, rng, 0.5),
                   random_matrix(batch, 4, rng, 0.5)};
    std::vector<std::uint8_t> mask;
    if (masked) {
      mask.assign(steps * batch, 1);
      mask[0 * batch + 1] = 0;
      mask[1 * batch + 1] = 0;
    }
    Matrix w_all = random_matrix(steps * batch, 4, rng);
    LstmState w_final{random_matrix(batch, 4, rng), random_matrix(batch, 4, rng)};

    auto loss = [&] {
      auto cache = lstm.forward(ps, xs, steps, mask, init);
      double s = 0.0;
      for (std::size_t i = 0; i < w_all.size(); ++i) {
        s += w_all.values()[i] * cache.hidden.values()[i];
      }
      for (std::size_t i = 0; i < w_final.h.size(); ++i) {
        s += w_final.h.values()[i] * cache.final.h.values()[i];
        s += w_final.c.values()[i] * cache.final.c.values()[i];
      }
      return s;
    };
    auto cache = lstm.forward(ps, xs, steps, mask, init);
    auto grads = ps.zeros_like();
    Matrix dx;
    LstmState d_init;
    lstm.backward(ps, grads, cache, xs, w_all, &w_final, &dx, &d_init);

    auto r = grad_check(ps.values(), grads, loss);
    CAPTURE(masked);
    CHECK(r.max_rel_error < 1e-6);

    auto rx = grad_check(xs.values(), dx.values(), loss);
    CHECK(rx.max_rel_error < 1e-6);
    auto rh = grad_check(init.h.values(), d_init.h.values(), loss);
    CHECK(rh.max_rel_error < 1e-6);
    auto rc = grad_check(init.c.values(), d_init.c.values(), loss);
    CHECK(rc.max_rel_error < 1e-6);

    if (masked) {
      // Padded steps neither receive nor pass input gradient.
      for (std::size_t j = 0; j < 3; ++j) CHECK(dx(0 * batch + 1, j) == 0.0);
    }
  }
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
  Rng rng(5);
  Network net(actor_spec(VariantSpec::parse("lstm_td3")), rng);
  NetInput in = random_input(net.spec(), 3, 4, rng, true, false);
  NetCache cache;
  net.forward(in, &cache);
  auto grads = net.params().zeros_like();
  net.backward(in, cache, Matrix(3, 1), grads, nullptr);
  for (double g : grads) CHECK(g == 0.0);
}

TEST_CASE("network gradient checks for every variant") {
  Rng rng(31);
  for (const char* name : {"td3", "lstm_td3", "lstm_td3_noact",
                           "lstm_td3_1ha1hc", "lstm_td3_1ha2hc", "htd3"}) {
    VariantSpec v = VariantSpec::parse(name);
    v.hidden = 8;
    v.history = 3;
    for (const NetSpec& spec : {actor_spec(v), critic_spec(v)}) {
      Network net(spec, rng);
      for (bool seeded : {false, true}) {
        if (seeded && spec.seq_in == 0) continue;
        NetInput in = random_input(spec, 3, 4, rng, true, seeded);
        auto check = check_network(net, in, rng);
        CAPTURE(name);
        CAPTURE(seeded);
        CHECK(check.worst() < 1e-6);
      }
    }
  }
}

TEST_CASE("gradient check detects a corrupted gradient") {
  Rng rng(8);
  VariantSpec v = VariantSpec::parse("lstm_td3");
  v.hidden = 8;
  Network net(critic_spec(v), rng);
  NetInput in = random_input(net.spec(), 2, 3, rng, false, false);
  NetCache cache;
  net.forward(in, &cache);
  Matrix w = random_matrix(2, 1, rng);
  auto grads = net.params().zeros_like();
  net.backward(in, cache, w, grads, nullptr);
  auto loss = [&] {
    Matrix out = net.forward(in);
    return w(0, 0) * out(0, 0) + w(1, 0) * out(1, 0);
  };
  CHECK(grad_check(net.params().values(), grads, loss).max_rel_error < 1e-6);

  // Flip the sign of the largest gradient entry.
  std::size_t k = 0;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (std::abs(grads[i]) > std::abs(grads[k])) k = i;
  }
  grads[k] = -grads[k];
  auto bad = grad_check(net.params().values(), grads, loss);
  CHECK(bad.max_rel_error > 0.3);
  CHECK(bad.worst_index == k);
}

TEST_CASE("gradient check reports non-finite loss") {
  std::vector<double> p{1.0, 2.0};
  std::vector<double> g{0.0, 0.0};
  auto loss = [&] {
    return p[1] > 2.0 ? std::numeric_limits<double>::infinity() : p[0];
  };
  try {
    grad_check(p, g, loss);
    FAIL("expected NumericFault");
  } catch (const NumericFault& e) {
    CHECK(std::string(e.what()).find("parameter 1") != std::string::npos);
  }
}

TEST_CASE("network rejects non-finite inputs") {
  Rng rng(3);
  Network net(actor_spec(VariantSpec::parse("td3")), rng);
  NetInput in;
  in.ff = Matrix(1, 3, {0.0, std::numeric_limits<double>::quiet_NaN(), 0.0});
  CHECK_THROWS_AS(net.forward(in), NumericFault);
}

TEST_CASE("network forward is deterministic") {
  Rng r1(12), r2(12);
  Network a(actor_spec(VariantSpec::parse("htd3")), r1);
  Network b(actor_spec(VariantSpec::parse("htd3")), r2);
  CHECK(std::equal(a.params().values().begin(), a.params().values().end(),
                   b.params().values().begin()));
  Rng in_rng(4);
  NetInput in = random_input(a.spec(), 5, 3, in_rng, true, true);
  CHECK(a.forward(in) == b.forward(in));
}

TEST_CASE("adam matches hand-computed steps") {
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  Adam opt(1, cfg);
  std::vector<double> p{1.0};
  std::vector<double> g{0.5};
  // m = 0.05, v = 2.5e-4; bias-corrected 0.5 and 0.25.
  opt.step(p, g);
  CHECK(opt.first_moment()[0] == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(opt.second_moment()[0] == doctest::Approx(2.5e-4).epsilon(1e-14));
  CHECK(p[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-14));
  // m = 0.095, v = 4.9975e-4; corrected moments stay 0.5 and 0.25.
  opt.step(p, g);
  CHECK(opt.first_moment()[0] == doctest::Approx(0.095).epsilon(1e-14));
  CHECK(opt.second_moment()[0] == doctest::Approx(4.9975e-4).epsilon(1e-14));
  CHECK(p[0] == doctest::Approx(1.0 - 0.2 * 0.5 / (0.5 + 1e-8)).epsilon(1e-13));
  CHECK(opt.steps() == 2);

  // Third step with a reversed gradient:
  // m = 0.9*0.095 - 0.05 = 0.0355, v = 0.999*4.9975e-4 + 2.5e-4.
  g[0] = -0.5;
  const double before = p[0];
  opt.step(p, g);
  const double m = 0.0355, v = 0.999 * 4.9975e-4 + 0.001 * 0.25;
  const double mh = m / (1 - std::pow(0.9, 3));
  const double vh = v / (1 - std::pow(0.999, 3));
  CHECK(p[0] == doctest::Approx(before - 0.1 * mh / (std::sqrt(vh) + 1e-8))
                    .epsilon(1e-13));
}

TEST_CASE("adam leaves parameters alone on zero gradient") {
  Adam opt(3, {});
  std::vector<double> p{1.0, -2.0, 3.0};
  const auto before = p;
  opt.step(p, std::vector<double>(3, 0.0));
  CHECK(p == before);
  CHECK_THROWS_AS(opt.step(p, std::vector<double>(2, 0.0)),
                  ContractViolation);
}

TEST_CASE("polyak averaging") {
  std::vector<double> target{0.0, 10.0};
  const std::vector<double> source{1.0, 0.0};
  polyak_update(target, source, 0.005);
  CHECK(target[0] == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(target[1] == doctest::Approx(9.95).epsilon(1e-15));

  // Geometric convergence: gap shrinks by (1 - tau) per step.
  std::vector<double> t{0.0};
  const std::vector<double> s{1.0};
  for (int k = 0; k < 200; ++k) polyak_update(t, s, 0.005);
  CHECK(1.0 - t[0] == doctest::Approx(std::pow(0.995, 200)).epsilon(1e-12));

  std::vector<double> u{3.0};
  polyak_update(u, s, 0.0);
  CHECK(u[0] == 3.0);
  polyak_update(u, s, 1.0);
  CHECK(u[0] == 1.0);
  CHECK_THROWS_AS(polyak_update(u, s, 1.5), ConfigError);
  CHECK_THROWS_AS(polyak_update(u, s, -0.1), ConfigError);
}

TEST_CASE("parameter counts of every variant") {
  struct Row {
    const char* name;
    std::size_t actor, critic;
  };
  const Row rows[] = {{"td3", 17153, 17281},
                      {"lstm_td3", 166273, 166401},
                      {"lstm_td3_noact", 166145, 166273},
                      {"lstm_td3_1ha1hc", 149377, 149377},
                      {"lstm_td3_1ha2hc", 149377, 166017},
                      {"htd3", 149377, 149377}};
  for (const auto& r : rows) {
    VariantSpec v = VariantSpec::parse(r.name);
    CAPTURE(r.name);
    CHECK(actor_spec(v).param_count() == r.actor);
    CHECK(critic_spec(v).param_count() == r.critic);
    CHECK(Network(actor_spec(v)).param_count() == r.actor);
  }
  // Independent arithmetic for the recurrent actor:
  // Lin(4,128) + LSTM(128,128) + Lin(128,128) + Lin(128,1).
  CHECK(4 * 128 + 128 + 4 * (128 * 128 + 128 * 128 + 2 * 128) +
            128 * 128 + 128 + 128 + 1 ==
        149377);
}
