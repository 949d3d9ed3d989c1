#include "rtd3/disturbance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rtd3/error.hpp"
#include "rtd3/rng.hpp"

namespace rtd3 {

namespace {

struct KindName {
  DisturbanceKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {DisturbanceKind::None, "none"},
    {DisturbanceKind::TemporalBias, "temporal_bias"},
    {DisturbanceKind::TemporalSine, "temporal_sine"},
    {DisturbanceKind::RandomSine, "random_sine"},
    {DisturbanceKind::GaussianNoise, "noise"},
    {DisturbanceKind::Hidden, "hidden"},
    {DisturbanceKind::CombinationalSine, "comb_sine"},
    {DisturbanceKind::DampedSine, "damped_sine"},
};

double parse_number(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) {
    throw ConfigError("scenario parameter '" + key + "': not a number: '" +
                      value + "'");
  }
  return v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

SineBurst sample_sine(const DisturbanceSpec& spec, std::size_t onset,
                      Rng& rng) {
  SineBurst w;
  w.amplitude = rng.uniform(spec.amplitude_min, spec.amplitude_max);
  w.period = rng.uniform(spec.period_min, spec.period_max);
  w.onset = onset;
  const auto span = static_cast<std::size_t>(std::ceil(w.period));
  w.length = std::min(span, spec.horizon - onset);
  return w;
}

}  // namespace

const char* kind_name(DisturbanceKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

DisturbanceSpec DisturbanceSpec::defaults(DisturbanceKind kind) {
  DisturbanceSpec s;
  s.kind = kind;
  switch (kind) {
    case DisturbanceKind::TemporalBias:
      s.amplitude_min = 0.5;
      s.amplitude_max = 1.0;
      s.count = 10;
      s.duration = 3;
      break;
    case DisturbanceKind::TemporalSine:
      s.amplitude_min = s.amplitude_max = 1.0;
      s.period_min = s.period_max = 70.0;
      break;
    case DisturbanceKind::RandomSine:
    case DisturbanceKind::CombinationalSine:
    case DisturbanceKind::DampedSine:
      s.amplitude_min = 0.5;
      s.amplitude_max = 2.0;
      s.period_min = 10.0;
      s.period_max = 100.0;
      break;
    case DisturbanceKind::GaussianNoise:
      s.sigma_min = s.sigma_max = 0.5;
      break;
    case DisturbanceKind::None:
    case DisturbanceKind::Hidden:
      break;
  }
  return s;
}

DisturbanceSpec DisturbanceSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const KindName* found = nullptr;
  for (const auto& k : kKinds) {
    if (name == k.name) found = &k;
  }
  if (found == nullptr) {
    throw ConfigError("unknown scenario '" + name + "'");
  }
  DisturbanceSpec s = defaults(found->kind);
  if (colon == std::string::npos) {
    s.validate();
    return s;
  }

  std::string params = text.substr(colon + 1);
  std::replace(params.begin(), params.end(), ';', ',');
  std::stringstream rest(params);
  std::string item;
  while (std::getline(rest, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("scenario parameter '" + item + "' needs key=value");
    }
    const std::string key = item.substr(0, eq);
    const double v = parse_number(key, item.substr(eq + 1));
    if (key == "amplitude") {
      s.amplitude_min = s.amplitude_max = v;
    } else if (key == "amplitude_min") {
      s.amplitude_min = v;
    } else if (key == "amplitude_max") {
      s.amplitude_max = v;
    } else if (key == "period") {
      s.period_min = s.period_max = v;
    } else if (key == "period_min") {
      s.period_min = v;
    } else if (key == "period_max") {
      s.period_max = v;
    } else if (key == "sigma") {
      s.sigma_min = s.sigma_max = v;
    } else if (key == "sigma_min") {
      s.sigma_min = v;
    } else if (key == "sigma_max") {
      s.sigma_max = v;
    } else if (key == "count") {
      s.count = static_cast<int>(v);
    } else if (key == "duration") {
      s.duration = static_cast<int>(v);
    } else {
      throw ConfigError("unknown scenario parameter '" + key + "' for '" +
                        name + "'");
    }
  }
  s.validate();
  return s;
}

std::string DisturbanceSpec::to_string() const {
  std::string out = kind_name(kind);
  std::vector<std::string> parts;
  auto range = [&](const char* key, double lo, double hi) {
    if (lo == hi) {
      parts.push_back(std::string(key) + "=" + fmt(lo));
    } else {
      parts.push_back(std::string(key) + "_min=" + fmt(lo));
      parts.push_back(std::string(key) + "_max=" + fmt(hi));
    }
  };
  switch (kind) {
    case DisturbanceKind::TemporalBias:
      range("amplitude", amplitude_min, amplitude_max);
      parts.push_back("count=" + std::to_string(count));
      parts.push_back("duration=" + std::to_string(duration));
      break;
    case DisturbanceKind::TemporalSine:
    case DisturbanceKind::RandomSine:
    case DisturbanceKind::CombinationalSine:
    case DisturbanceKind::DampedSine:
      range("amplitude", amplitude_min, amplitude_max);
      range("period", period_min, period_max);
      break;
    case DisturbanceKind::GaussianNoise:
      range("sigma", sigma_min, sigma_max);
      break;
    case DisturbanceKind::None:
    case DisturbanceKind::Hidden:
      return out;
  }
  out += ":";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ";";
    out += parts[i];
  }
  return out;
}

void DisturbanceSpec::validate() const {
  auto fail = [&](const std::string& what) {
    throw ConfigError(std::string("scenario '") + kind_name(kind) +
                      "': " + what);
  };
  if (horizon == 0) fail("horizon must be positive");
  switch (kind) {
    case DisturbanceKind::TemporalBias:
      if (amplitude_min > amplitude_max) fail("empty amplitude range");
      if (count < 0) fail("count must be >= 0");
      if (duration < 1) fail("duration must be >= 1");
      break;
    case DisturbanceKind::TemporalSine:
    case DisturbanceKind::RandomSine:
    case DisturbanceKind::CombinationalSine:
    case DisturbanceKind::DampedSine:
      if (amplitude_min > amplitude_max) fail("empty amplitude range");
      if (period_min > period_max) fail("empty period range");
      if (period_min < 1.0) fail("periods must be >= 1");
      break;
    case DisturbanceKind::GaussianNoise:
      if (sigma_min > sigma_max) fail("empty sigma range");
      if (sigma_min < 0.0) fail("sigma must be >= 0");
      break;
    case DisturbanceKind::None:
    case DisturbanceKind::Hidden:
      break;
  }
}

double SineBurst::value(std::size_t t) const {
  if (t < onset || t >= onset + length) return 0.0;
  const double dt = static_cast<double>(t - onset);
  const double s =
      amplitude * std::sin(2.0 * std::numbers::pi * dt / period);
  return damped ? std::exp(-dt / period) * s : s;
}

double DisturbanceSchedule::offset(std::size_t t) const {
  double total = 0.0;
  for (const auto& b : biases) {
    if (t >= b.onset && t < b.onset + b.length) total += b.amplitude;
  }
  for (const auto& w : waves) total += w.value(t);
  return total;
}

std::size_t obs_dim(const DisturbanceSpec& spec) {
  return spec.kind == DisturbanceKind::Hidden ? 2 : 3;
}

DisturbanceSchedule init_episode(const DisturbanceSpec& spec, Rng& rng) {
  DisturbanceSchedule sched;
  sched.kind = spec.kind;
  const std::size_t H = spec.horizon;
  switch (spec.kind) {
    case DisturbanceKind::None:
    case DisturbanceKind::Hidden:
      break;
    case DisturbanceKind::TemporalBias:
      sched.affected = {0, 1};
      for (int i = 0; i < spec.count; ++i) {
        BiasWindow b;
        b.onset = rng.index(H);
        b.length = std::min<std::size_t>(static_cast<std::size_t>(spec.duration),
                                         H - b.onset);
        b.amplitude = rng.uniform(spec.amplitude_min, spec.amplitude_max);
        sched.biases.push_back(b);
      }
      break;
    case DisturbanceKind::TemporalSine:
      sched.affected = {0, 1};
      sched.waves.push_back(sample_sine(spec, rng.index(H), rng));
      break;
    case DisturbanceKind::RandomSine:
      sched.affected = {0, 1, 2};
      sched.waves.push_back(sample_sine(spec, rng.index(H), rng));
      break;
    case DisturbanceKind::CombinationalSine: {
      sched.affected = {0, 1, 2};
      const std::size_t onset = rng.index(H);
      sched.waves.push_back(sample_sine(spec, onset, rng));
      sched.waves.push_back(sample_sine(spec, onset, rng));
      break;
    }
    case DisturbanceKind::DampedSine: {
      sched.affected = {0, 1, 2};
      SineBurst w = sample_sine(spec, rng.index(H), rng);
      w.damped = true;
      w.length = H - w.onset;
      sched.waves.push_back(w);
      break;
    }
    case DisturbanceKind::GaussianNoise:
      sched.affected = {0, 1, 2};
      sched.sigma = rng.uniform(spec.sigma_min, spec.sigma_max);
      break;
  }
  return sched;
}

Observation apply(const DisturbanceSchedule& schedule, std::size_t t,
                  const Observation& clean, Rng& noise_rng) {
  Observation out = clean;
  switch (schedule.kind) {
    case DisturbanceKind::None:
      return out;
    case DisturbanceKind::Hidden:
      out.values[2] = 0.0;
      out.size = 2;
      return out;
    case DisturbanceKind::GaussianNoise:
      for (std::size_t i : schedule.affected) {
        out.values[i] += noise_rng.normal(0.0, schedule.sigma);
      }
      return out;
    default: {
      const double d = schedule.offset(t);
      for (std::size_t i : schedule.affected) out.values[i] += d;
      return out;
    }
  }
}

}  // namespace rtd3
