#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rtd3/pendulum.hpp"

namespace rtd3 {

class Rng;

enum class DisturbanceKind {
  None,
  TemporalBias,
  TemporalSine,
  RandomSine,
  GaussianNoise,
  Hidden,
  CombinationalSine,
  DampedSine,
};

// Declarative description of one observation-disturbance scenario. Ranges are
// closed intervals; a degenerate range (min == max) fixes the value.
struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::None;
  double amplitude_min = 0.0;
  double amplitude_max = 0.0;
  double period_min = 0.0;
  double period_max = 0.0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  int count = 0;     // bias windows per episode
  int duration = 0;  // steps per bias window
  std::size_t horizon = 200;

  // Scenario defaults by config name: none | temporal_bias | temporal_sine |
  // random_sine | noise | hidden | comb_sine | damped_sine. An optional
  // ":key=value,..." suffix (',' or ';' separated) overrides parameters,
  // e.g. "noise:sigma=1.0" or "temporal_bias:amplitude=1.0". Throws
  // ConfigError on unknown names/keys.
  static DisturbanceSpec parse(const std::string& text);
  static DisturbanceSpec defaults(DisturbanceKind kind);

  // Canonical text form, ';' separated so it is safe inside CSV fields;
  // parse(to_string()) reproduces the spec.
  std::string to_string() const;
  void validate() const;
  bool operator==(const DisturbanceSpec&) const = default;
};

const char* kind_name(DisturbanceKind kind);

// A sine burst A sin(2 pi (t - onset) / T) on [onset, onset + length), or
// with `damped` the decaying e^{-(t-onset)/T} A sin(2 pi (t - onset) / T).
struct SineBurst {
  double amplitude = 0.0;
  double period = 1.0;
  std::size_t onset = 0;
  std::size_t length = 0;
  bool damped = false;

  double value(std::size_t t) const;
};

struct BiasWindow {
  std::size_t onset = 0;
  std::size_t length = 0;
  double amplitude = 0.0;
};

// Episode-level randomness sampled up front by init_episode().
struct DisturbanceSchedule {
  DisturbanceKind kind = DisturbanceKind::None;
  std::vector<BiasWindow> biases;
  std::vector<SineBurst> waves;
  double sigma = 0.0;
  std::vector<std::size_t> affected;  // observation indices receiving offsets

  // Deterministic additive offset at step t (bias windows and waves summed).
  double offset(std::size_t t) const;
};

std::size_t obs_dim(const DisturbanceSpec& spec);

DisturbanceSchedule init_episode(const DisturbanceSpec& spec, Rng& rng);

// Disturbed observation at step t. Gaussian noise is drawn from
// `noise_rng`, fresh per element per step.
Observation apply(const DisturbanceSchedule& schedule, std::size_t t,
                  const Observation& clean, Rng& noise_rng);

}  // namespace rtd3
