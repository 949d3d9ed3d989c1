#include "rtd3/config.hpp"

#include <fstream>
#include <set>

#include "rtd3/error.hpp"

namespace rtd3 {

using nlohmann::json;

namespace {

void reject_unknown(const json& doc, const std::set<std::string>& known,
                    const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& doc, const char* key, T& out) {
  if (!doc.contains(key)) return;
  try {
    out = doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key +
                      "' has the wrong type");
  }
}

}  // namespace

void RunConfig::finalize() {
  variant.obs_dim = obs_dim(scenario);
  validate();
}

void RunConfig::validate() const {
  variant.validate();
  scenario.validate();
  hyper.validate();
  if (variant.obs_dim != obs_dim(scenario)) {
    throw ConfigError("variant obs_dim does not match the scenario");
  }
  if (eval_every == 0) throw ConfigError("eval_every must be positive");
  if (eval_episodes == 0) throw ConfigError("eval_episodes must be positive");
  if (final_window == 0) throw ConfigError("final_window must be positive");
  if (replay_capacity < hyper.batch_size) {
    throw ConfigError("replay_capacity is smaller than batch_size");
  }
  if (!(norm_hi > norm_lo)) {
    throw ConfigError("normalize.hi must exceed normalize.lo");
  }
}

json hyper_to_json(const Hyperparams& h) {
  return json{{"gamma", h.gamma},
              {"tau", h.tau},
              {"policy_delay", h.policy_delay},
              {"target_noise", h.target_noise},
              {"target_noise_clip", h.target_noise_clip},
              {"exploration_noise", h.exploration_noise},
              {"batch_size", h.batch_size},
              {"actor_lr", h.actor_lr},
              {"critic_lr", h.critic_lr},
              {"start_steps", h.start_steps},
              {"updates_per_step", h.updates_per_step},
              {"max_action", h.max_action},
              {"htd3_sequence_actor", h.htd3_sequence_actor}};
}

void hyper_from_json(const json& doc, Hyperparams& h) {
  reject_unknown(doc,
                 {"gamma", "tau", "policy_delay", "target_noise",
                  "target_noise_clip", "exploration_noise", "batch_size",
                  "actor_lr", "critic_lr", "start_steps", "updates_per_step",
                  "max_action", "htd3_sequence_actor"},
                 "hyper");
  read(doc, "gamma", h.gamma);
  read(doc, "tau", h.tau);
  read(doc, "policy_delay", h.policy_delay);
  read(doc, "target_noise", h.target_noise);
  read(doc, "target_noise_clip", h.target_noise_clip);
  read(doc, "exploration_noise", h.exploration_noise);
  read(doc, "batch_size", h.batch_size);
  read(doc, "actor_lr", h.actor_lr);
  read(doc, "critic_lr", h.critic_lr);
  read(doc, "start_steps", h.start_steps);
  read(doc, "updates_per_step", h.updates_per_step);
  read(doc, "max_action", h.max_action);
  read(doc, "htd3_sequence_actor", h.htd3_sequence_actor);
}

RunConfig config_from_json(const json& doc) {
  reject_unknown(doc,
                 {"schema_version", "variant", "history", "hidden",
                  "scenario", "seed", "total_steps", "eval_every",
                  "eval_episodes", "final_window", "rollout_memory",
                  "replay_capacity", "normalize", "out", "hyper"},
                 "run config");
  if (!doc.contains("schema_version")) {
    throw ConfigError("run config lacks schema_version");
  }
  int version = 0;
  read(doc, "schema_version", version);
  if (version != kConfigSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(version));
  }
  RunConfig cfg;
  std::string variant = "td3";
  read(doc, "variant", variant);
  cfg.variant = VariantSpec::parse(variant);
  read(doc, "history", cfg.variant.history);
  read(doc, "hidden", cfg.variant.hidden);
  std::string scenario = "none";
  read(doc, "scenario", scenario);
  cfg.scenario = DisturbanceSpec::parse(scenario);
  read(doc, "seed", cfg.seed);
  read(doc, "total_steps", cfg.total_steps);
  read(doc, "eval_every", cfg.eval_every);
  read(doc, "eval_episodes", cfg.eval_episodes);
  read(doc, "final_window", cfg.final_window);
  std::string memory = rollout_memory_name(cfg.rollout_memory);
  read(doc, "rollout_memory", memory);
  cfg.rollout_memory = parse_rollout_memory(memory);
  read(doc, "replay_capacity", cfg.replay_capacity);
  if (doc.contains("normalize")) {
    const json& n = doc.at("normalize");
    reject_unknown(n, {"lo", "hi"}, "normalize");
    read(n, "lo", cfg.norm_lo);
    read(n, "hi", cfg.norm_hi);
  }
  read(doc, "out", cfg.out_dir);
  if (doc.contains("hyper")) hyper_from_json(doc.at("hyper"), cfg.hyper);
  cfg.finalize();
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json doc{{"schema_version", kConfigSchemaVersion},
           {"variant", cfg.variant.name()},
           {"history", cfg.variant.history},
           {"hidden", cfg.variant.hidden},
           {"scenario", cfg.scenario.to_string()},
           {"seed", cfg.seed},
           {"total_steps", cfg.total_steps},
           {"eval_every", cfg.eval_every},
           {"eval_episodes", cfg.eval_episodes},
           {"final_window", cfg.final_window},
           {"rollout_memory", rollout_memory_name(cfg.rollout_memory)},
           {"replay_capacity", cfg.replay_capacity},
           {"normalize", {{"lo", cfg.norm_lo}, {"hi", cfg.norm_hi}}},
           {"hyper", hyper_to_json(cfg.hyper)}};
  if (!cfg.out_dir.empty()) doc["out"] = cfg.out_dir;
  return doc;
}

json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  return config_from_json(read_json(path));
}

}  // namespace rtd3
