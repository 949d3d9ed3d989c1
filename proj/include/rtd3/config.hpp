#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "rtd3/agent.hpp"
#include "rtd3/disturbance.hpp"
#include "rtd3/policy.hpp"
#include "rtd3/variant.hpp"

namespace rtd3 {

inline constexpr int kConfigSchemaVersion = 1;

// Everything one training run depends on.
struct RunConfig {
  VariantSpec variant;  // history = l; obs_dim follows the scenario
  DisturbanceSpec scenario;
  std::uint64_t seed = 0;
  std::size_t total_steps = 30000;
  std::size_t eval_every = 1000;
  std::size_t eval_episodes = 10;
  std::size_t final_window = 10;  // eval points averaged for final return
  Hyperparams hyper;
  RolloutMemory rollout_memory = RolloutMemory::Window;
  std::size_t replay_capacity = 100000;
  double norm_lo = -1700.0;
  double norm_hi = 0.0;
  std::string out_dir;  // empty: no files written

  // Re-derives variant.obs_dim from the scenario, then checks every field.
  void finalize();
  void validate() const;
};

// JSON document:
//   { "schema_version": 1, "variant": "lstm_td3", "history": 3,
//     "hidden": 128, "scenario": "noise:sigma=0.5", "seed": 0,
//     "total_steps": 30000, "eval_every": 1000, "eval_episodes": 10,
//     "final_window": 10, "rollout_memory": "window",
//     "replay_capacity": 100000, "normalize": {"lo": -1700, "hi": 0},
//     "out": "runs/x", "hyper": { "gamma": 0.99, ... } }
// Every key is optional except schema_version; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::string& path);
nlohmann::json hyper_to_json(const Hyperparams& h);
void hyper_from_json(const nlohmann::json& doc, Hyperparams& h);

// Reads a JSON file, mapping I/O and syntax failures to IoError/ConfigError.
nlohmann::json read_json(const std::string& path);

}  // namespace rtd3
