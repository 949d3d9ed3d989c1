#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rtd3/disturbance.hpp"
#include "rtd3/error.hpp"
#include "rtd3/rng.hpp"

using namespace rtd3;
using std::numbers::pi;

namespace {

Observation clean_obs() { return observe({0.7, -1.3, 0}); }

}  // namespace

TEST_CASE("no disturbance leaves observations unchanged") {
  auto spec = DisturbanceSpec::parse("none");
  Rng rng(1), noise(2);
  auto sched = init_episode(spec, rng);
  for (std::size_t t = 0; t < 200; ++t) {
    CHECK(apply(sched, t, clean_obs(), noise) == clean_obs());
  }
  CHECK(obs_dim(spec) == 3);
}

TEST_CASE("hidden velocity drops the third component") {
  auto spec = DisturbanceSpec::parse("hidden");
  CHECK(obs_dim(spec) == 2);
  Rng rng(1), noise(2);
  auto sched = init_episode(spec, rng);
  auto o = apply(sched, 5, clean_obs(), noise);
  CHECK(o.size == 2);
  CHECK(o[0] == std::cos(0.7));
  CHECK(o[1] == std::sin(0.7));
}

TEST_CASE("temporal bias windows") {
  auto spec = DisturbanceSpec::parse("temporal_bias");
  CHECK(spec.count == 10);
  CHECK(spec.duration == 3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed), noise(0);
    auto sched = init_episode(spec, rng);
    REQUIRE(sched.biases.size() == 10);
    for (const auto& b : sched.biases) {
      CHECK(b.onset < 200);
      CHECK(b.amplitude >= 0.5);
      CHECK(b.amplitude <= 1.0);
      CHECK(b.length == std::min<std::size_t>(3, 200 - b.onset));
    }
    // Brute force: offset is the sum of covering windows; velocity untouched.
    for (std::size_t t = 0; t < 200; ++t) {
      double expected = 0.0;
      for (const auto& b : sched.biases) {
        if (t >= b.onset && t < b.onset + b.length) expected += b.amplitude;
      }
      auto o = apply(sched, t, clean_obs(), noise);
      CHECK(o[0] - clean_obs()[0] == doctest::Approx(expected));
      CHECK(o[1] - clean_obs()[1] == doctest::Approx(expected));
      CHECK(o[2] == clean_obs()[2]);
    }
  }
}

TEST_CASE("schedules are reproducible per seed") {
  auto spec = DisturbanceSpec::parse("temporal_bias");
  Rng a(17), b(17), c(18);
  auto sa = init_episode(spec, a);
  auto sb = init_episode(spec, b);
  auto sc = init_episode(spec, c);
  for (std::size_t t = 0; t < 200; ++t) CHECK(sa.offset(t) == sb.offset(t));
  bool differs = false;
  for (std::size_t t = 0; t < 200; ++t) differs |= sa.offset(t) != sc.offset(t);
  CHECK(differs);
}

TEST_CASE("sine reaches its amplitude a quarter period after onset") {
  auto spec = DisturbanceSpec::parse("temporal_sine:period=4");
  Rng rng(3), noise(0);
  auto sched = init_episode(spec, rng);
  REQUIRE(sched.waves.size() == 1);
  const auto& w = sched.waves[0];
  CHECK(w.amplitude == 1.0);
  CHECK(sched.offset(w.onset) == 0.0);
  CHECK(sched.offset(w.onset + 1) == doctest::Approx(1.0).epsilon(1e-15));
  if (w.onset + 3 < 200) {
    CHECK(sched.offset(w.onset + 3) == doctest::Approx(-1.0).epsilon(1e-15));
  }
  // Outside the burst nothing is added.
  CHECK(sched.offset(w.onset + 4) == 0.0);
  if (w.onset > 0) CHECK(sched.offset(w.onset - 1) == 0.0);
  auto o = apply(sched, w.onset + 1, clean_obs(), noise);
  CHECK(o[2] == clean_obs()[2]);
}

TEST_CASE("default temporal sine") {
  auto spec = DisturbanceSpec::parse("temporal_sine");
  CHECK(spec.amplitude_min == 1.0);
  CHECK(spec.period_min == 70.0);
  Rng rng(8);
  auto sched = init_episode(spec, rng);
  const auto& w = sched.waves[0];
  CHECK(w.length == std::min<std::size_t>(70, 200 - w.onset));
}

TEST_CASE("random sine parameters vary by episode") {
  auto spec = DisturbanceSpec::parse("random_sine");
  Rng rng(4), noise(0);
  double a0 = -1.0;
  bool varied = false;
  for (int ep = 0; ep < 20; ++ep) {
    auto sched = init_episode(spec, rng);
    REQUIRE(sched.waves.size() == 1);
    const auto& w = sched.waves[0];
    CHECK(w.amplitude >= 0.5);
    CHECK(w.amplitude <= 2.0);
    CHECK(w.period >= 10.0);
    CHECK(w.period <= 100.0);
    if (ep == 0) a0 = w.amplitude;
    varied |= w.amplitude != a0;
    // All three components receive the same additive offset.
    const std::size_t t = w.onset + w.length / 3;
    auto o = apply(sched, t, clean_obs(), noise);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(o[i] - clean_obs()[i] == doctest::Approx(sched.offset(t)));
    }
  }
  CHECK(varied);
}

TEST_CASE("combination sine superposes two waves") {
  auto spec = DisturbanceSpec::parse("comb_sine");
  Rng rng(12);
  auto sched = init_episode(spec, rng);
  REQUIRE(sched.waves.size() == 2);
  CHECK(sched.waves[0].onset == sched.waves[1].onset);
  for (std::size_t t = 0; t < 200; ++t) {
    CHECK(sched.offset(t) ==
          doctest::Approx(sched.waves[0].value(t) + sched.waves[1].value(t)));
  }
}

TEST_CASE("damped sine follows its envelope") {
  SineBurst w{1.5, 20.0, 10, 190, true};
  const double t = 25.0;
  const double dt = t - 10.0;
  CHECK(w.value(25) == doctest::Approx(std::exp(-dt / 20.0) * 1.5 *
                                       std::sin(2 * pi * dt / 20.0)));
  CHECK(w.value(9) == 0.0);

  auto spec = DisturbanceSpec::parse("damped_sine");
  Rng rng(5);
  auto sched = init_episode(spec, rng);
  REQUIRE(sched.waves.size() == 1);
  CHECK(sched.waves[0].damped);
  CHECK(sched.waves[0].onset + sched.waves[0].length == 200);
}

TEST_CASE("gaussian noise standard deviation") {
  auto spec = DisturbanceSpec::parse("noise");
  CHECK(spec.sigma_min == 0.5);
  Rng rng(1), noise(99);
  auto sched = init_episode(spec, rng);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    auto o = apply(sched, static_cast<std::size_t>(i % 200), clean_obs(),
                   noise);
    const double d = o[2] - clean_obs()[2];
    sum += d;
    sq += d * d;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(sd - 0.5) < 0.01);
  CHECK(std::abs(mean) < 4 * 0.5 / std::sqrt(n));

  auto big = DisturbanceSpec::parse("noise:sigma=1");
  CHECK(big.sigma_min == 1.0);
  CHECK(big.sigma_max == 1.0);
}

TEST_CASE("noise is fresh per step but reproducible per stream") {
  Rng rng(1);
  auto sched = init_episode(DisturbanceSpec::parse("noise"), rng);
  Rng n1(5), n2(5);
  auto a = apply(sched, 0, clean_obs(), n1);
  auto b = apply(sched, 1, clean_obs(), n1);
  auto c = apply(sched, 0, clean_obs(), n2);
  CHECK(a == c);
  CHECK(a != b);
}

TEST_CASE("scenario text round trip") {
  for (const char* name :
       {"none", "temporal_bias", "temporal_sine", "random_sine", "noise",
        "hidden", "comb_sine", "damped_sine", "noise:sigma=1.0",
        "temporal_bias:amplitude=1,count=4", "random_sine:period_min=20;period_max=30"}) {
    auto spec = DisturbanceSpec::parse(name);
    CAPTURE(name);
    CHECK(DisturbanceSpec::parse(spec.to_string()) == spec);
    CHECK(spec.to_string().find(',') == std::string::npos);
  }
  auto tb = DisturbanceSpec::parse("temporal_bias:amplitude=1,count=4");
  CHECK(tb.amplitude_min == 1.0);
  CHECK(tb.count == 4);
}

TEST_CASE("invalid scenarios are rejected") {
  CHECK_THROWS_AS(DisturbanceSpec::parse("wind"), ConfigError);
  CHECK_THROWS_AS(DisturbanceSpec::parse("noise:gain=2"), ConfigError);
  CHECK_THROWS_AS(DisturbanceSpec::parse("noise:sigma=abc"), ConfigError);
  CHECK_THROWS_AS(DisturbanceSpec::parse("noise:sigma=-1"), ConfigError);
  CHECK_THROWS_AS(DisturbanceSpec::parse("noise:sigma"), ConfigError);
  CHECK_THROWS_AS(DisturbanceSpec::parse("random_sine:period=0.5"),
                  ConfigError);
  CHECK_THROWS_AS(
      DisturbanceSpec::parse("random_sine:amplitude_min=3;amplitude_max=1"),
      ConfigError);
}
