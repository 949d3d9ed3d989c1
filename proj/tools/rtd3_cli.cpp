// Command-line front end: train, eval, cross-eval, bench, gradcheck, params
// and grid. Failures print one JSON error record on stderr and exit nonzero.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rtd3/checkpoint.hpp"
#include "rtd3/config.hpp"
#include "rtd3/error.hpp"
#include "rtd3/evaluate.hpp"
#include "rtd3/experiments.hpp"
#include "rtd3/netcheck.hpp"
#include "rtd3/rng.hpp"
#include "rtd3/runtime.hpp"
#include "rtd3/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rtd3;

namespace {

int exit_code(const std::string& kind) {
  if (kind == "config_error") return 2;
  if (kind == "io_error") return 3;
  if (kind == "numeric_fault") return 4;
  if (kind == "contract_violation") return 5;
  return 1;
}

int fail(const std::string& kind, const std::string& message,
         const std::string& command) {
  std::cerr << json{{"error", kind}, {"message", message},
                    {"command", command}}.dump()
            << std::endl;
  return exit_code(kind);
}

// Writes `lines` to <out>/<name> when out is set, otherwise to stdout.
void emit_csv(const std::string& out, const char* name, const char* header,
              const std::vector<std::string>& rows) {
  if (out.empty()) {
    std::cout << header << '\n';
    for (const auto& r : rows) std::cout << r << '\n';
    return;
  }
  fs::create_directories(out);
  std::ofstream os(fs::path(out) / name, std::ios::trunc);
  os << header << '\n';
  for (const auto& r : rows) os << r << '\n';
  if (!os) throw IoError("cannot write " + (fs::path(out) / name).string());
  std::cout << (fs::path(out) / name).string() << '\n';
}

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string variant;
  std::string scenario;
  std::optional<std::size_t> history;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> hidden;
  std::optional<std::size_t> eval_every;
  std::optional<std::size_t> eval_episodes;
  std::string rollout_memory;
};

RunConfig build_config(const Overrides& o) {
  json doc = o.config.empty() ? json{{"schema_version", kConfigSchemaVersion}}
                              : read_json(o.config);
  if (o.seed) doc["seed"] = *o.seed;
  if (!o.out.empty()) doc["out"] = o.out;
  if (!o.variant.empty()) doc["variant"] = o.variant;
  if (!o.scenario.empty()) doc["scenario"] = o.scenario;
  if (o.history) doc["history"] = *o.history;
  if (o.steps) doc["total_steps"] = *o.steps;
  if (o.hidden) doc["hidden"] = *o.hidden;
  if (o.eval_every) doc["eval_every"] = *o.eval_every;
  if (o.eval_episodes) doc["eval_episodes"] = *o.eval_episodes;
  if (!o.rollout_memory.empty()) doc["rollout_memory"] = o.rollout_memory;
  return config_from_json(doc);
}

// Run config used as defaults by the non-training commands.
std::optional<RunConfig> optional_config(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return config_from_json(read_json(path));
}

const std::vector<std::string> kAllVariants = {
    "td3",          "lstm_td3",        "lstm_td3_noact",
    "lstm_td3_1ha1hc", "lstm_td3_1ha2hc", "htd3"};

}  // namespace

int main(int argc, char** argv) {
  configure_allocator();
  CLI::App app{"Recurrent TD3 variants on a disturbed pendulum"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RTD3_VERSION);

  // train
  Overrides tr;
  bool quiet = false;
  auto* train_cmd = app.add_subcommand("train", "Train one run");
  train_cmd->add_option("--config", tr.config, "Run config (JSON)");
  train_cmd->add_option("--seed", tr.seed, "Run seed");
  train_cmd->add_option("--out", tr.out, "Output directory");
  train_cmd->add_option("--variant", tr.variant, "Algorithm variant");
  train_cmd->add_option("--scenario", tr.scenario, "Disturbance scenario");
  train_cmd->add_option("--l", tr.history, "History length l");
  train_cmd->add_option("--steps", tr.steps, "Total environment steps");
  train_cmd->add_option("--hidden", tr.hidden, "Hidden width H");
  train_cmd->add_option("--eval-every", tr.eval_every, "Steps between evals");
  train_cmd->add_option("--eval-episodes", tr.eval_episodes,
                        "Episodes per eval point");
  train_cmd->add_option("--rollout-memory", tr.rollout_memory,
                        "window or carried");
  train_cmd->add_flag("--quiet", quiet, "No progress lines on stderr");

  // eval
  std::string ckpt;
  std::string eval_config;
  std::string eval_scenario;
  std::optional<std::size_t> eval_episodes;
  std::uint64_t eval_seed = 0;
  std::string eval_memory;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", ckpt, "checkpoint.bin")->required();
  eval_cmd->add_option("--config", eval_config,
                       "Run config for episodes, rollout memory, bounds");
  eval_cmd->add_option("--scenario", eval_scenario,
                       "Scenario (default: the training scenario)");
  eval_cmd->add_option("--episodes", eval_episodes, "Episodes");
  eval_cmd->add_option("--seed", eval_seed, "Evaluation seed");
  eval_cmd->add_option("--rollout-memory", eval_memory, "window or carried");
  eval_cmd->add_option("--out", eval_out, "Directory for eval.json");

  // cross-eval
  std::string xe_ckpt;
  std::string xe_config;
  std::vector<std::string> xe_scenarios;
  std::size_t xe_episodes = 100;
  std::size_t xe_seeds = 5;
  std::uint64_t xe_seed = 0;
  std::string xe_memory;
  std::string xe_out;
  auto* xe_cmd = app.add_subcommand(
      "cross-eval", "Evaluate a checkpoint across scenarios");
  xe_cmd->add_option("--checkpoint", xe_ckpt, "checkpoint.bin")->required();
  xe_cmd->add_option("--config", xe_config,
                     "Run config for rollout memory and bounds");
  xe_cmd->add_option("--scenario", xe_scenarios,
                     "Scenarios (repeatable; default: training, "
                     "temporal_bias:amplitude=1, noise:sigma=1, comb_sine, "
                     "damped_sine)");
  xe_cmd->add_option("--episodes", xe_episodes, "Episodes per seed");
  xe_cmd->add_option("--eval-seeds", xe_seeds, "Number of eval seeds");
  xe_cmd->add_option("--seed", xe_seed, "First eval seed");
  xe_cmd->add_option("--rollout-memory", xe_memory, "window or carried");
  xe_cmd->add_option("--out", xe_out, "Directory for cross_eval.csv");

  // bench
  std::string bench_config;
  std::vector<std::string> bench_variants;
  std::vector<std::size_t> bench_ls;
  std::optional<std::size_t> bench_hidden;
  std::optional<std::size_t> bench_batch;
  std::size_t bench_samples = 10;
  std::uint64_t bench_seed = 0;
  std::string bench_out;
  auto* bench_cmd =
      app.add_subcommand("bench", "Time td3_update per (variant, l)");
  bench_cmd->add_option("--config", bench_config,
                        "Run config for variant, l, H and hyperparameters");
  bench_cmd->add_option("--variant", bench_variants, "Variants (repeatable)");
  bench_cmd->add_option("--l", bench_ls, "History lengths (repeatable)");
  bench_cmd->add_option("--hidden", bench_hidden, "Hidden width H");
  bench_cmd->add_option("--batch", bench_batch, "Batch size");
  bench_cmd->add_option("--samples", bench_samples,
                        "Timed delay cycles per cell");
  bench_cmd->add_option("--seed", bench_seed, "Seed");
  bench_cmd->add_option("--out", bench_out, "Directory for bench.csv");

  // gradcheck
  std::string gc_config;
  std::vector<std::string> gc_variants;
  std::size_t gc_hidden = 8;
  std::optional<std::size_t> gc_l;
  std::uint64_t gc_seed = 0;
  double gc_tol = 1e-6;
  std::string gc_out;
  auto* gc_cmd = app.add_subcommand(
      "gradcheck", "Finite-difference check of actor and critic gradients");
  gc_cmd->add_option("--config", gc_config, "Run config for variant and l");
  gc_cmd->add_option("--variant", gc_variants, "Variants (repeatable)");
  gc_cmd->add_option("--hidden", gc_hidden, "Hidden width H");
  gc_cmd->add_option("--l", gc_l, "History length (sequence = l + 1)");
  gc_cmd->add_option("--seed", gc_seed, "Seed");
  gc_cmd->add_option("--tolerance", gc_tol, "Maximum relative error");
  gc_cmd->add_option("--out", gc_out, "Directory for gradcheck.json");

  // params
  std::size_t p_obs = 3;
  std::size_t p_hidden = 128;
  auto* params_cmd =
      app.add_subcommand("params", "Parameter counts of every variant");
  params_cmd->add_option("--obs-dim", p_obs, "Observation size");
  params_cmd->add_option("--hidden", p_hidden, "Hidden width H");
  std::string p_out;
  params_cmd->add_option("--out", p_out, "Directory for params.csv");

  // grid
  std::string grid_config;
  std::string grid_out;
  std::optional<std::size_t> grid_workers;
  auto* grid_cmd = app.add_subcommand("grid", "Run a variant/scenario grid");
  grid_cmd->add_option("--config", grid_config, "Grid config (JSON)")
      ->required();
  grid_cmd->add_option("--out", grid_out, "Output directory");
  grid_cmd->add_option("--workers", grid_workers, "Concurrent runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("config_error", e.what(), "parse");
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (*train_cmd) {
      const RunConfig cfg = build_config(tr);
      const TrainResult r = train(cfg, [&](const CurvePoint& p) {
        if (quiet) return;
        std::fprintf(stderr, "step %zu  eval %.1f +- %.1f\n", p.env_steps,
                     p.eval_return_mean, p.eval_return_std);
      });
      std::cout << json{{"ok", r.ok},
                        {"final_window_mean", r.final_window_mean},
                        {"eval_points", r.curve.size()},
                        {"updates", r.agent->update_count()},
                        {"out", cfg.out_dir}}
                       .dump()
                << std::endl;
    } else if (*eval_cmd) {
      const RunConfig base = optional_config(eval_config).value_or(RunConfig{});
      const std::size_t episodes = eval_episodes.value_or(base.eval_episodes);
      const RolloutMemory memory = eval_memory.empty()
                                       ? base.rollout_memory
                                       : parse_rollout_memory(eval_memory);
      const Checkpoint ck = load_checkpoint(ckpt);
      const DisturbanceSpec scenario = DisturbanceSpec::parse(
          eval_scenario.empty() ? ck.scenario : eval_scenario);
      const EvalResult r = evaluate(ck.agent.actor(), ck.agent.variant(),
                                    memory, scenario, episodes, eval_seed);
      const json doc{
          {"scenario", scenario.to_string()},
          {"episodes", episodes},
          {"seed", eval_seed},
          {"mean", r.mean},
          {"std", r.std},
          {"normalized", normalize_return(r.mean, base.norm_lo, base.norm_hi)}};
      if (!eval_out.empty()) {
        fs::create_directories(eval_out);
        std::ofstream os(fs::path(eval_out) / "eval.json", std::ios::trunc);
        os << doc.dump(2) << '\n';
        if (!os) throw IoError("cannot write eval.json");
      }
      std::cout << doc.dump() << std::endl;
    } else if (*xe_cmd) {
      const Checkpoint ck = load_checkpoint(xe_ckpt);
      if (xe_scenarios.empty()) {
        xe_scenarios = {ck.scenario, "temporal_bias:amplitude=1",
                        "noise:sigma=1", "comb_sine", "damped_sine"};
      }
      std::vector<DisturbanceSpec> specs;
      for (const auto& s : xe_scenarios) {
        specs.push_back(DisturbanceSpec::parse(s));
      }
      const RunConfig base = optional_config(xe_config).value_or(RunConfig{});
      const RolloutMemory memory = xe_memory.empty()
                                       ? base.rollout_memory
                                       : parse_rollout_memory(xe_memory);
      const auto rows =
          cross_eval(ck.agent, ck.scenario, specs, xe_episodes, xe_seeds,
                     xe_seed, memory, base.norm_lo, base.norm_hi);
      std::vector<std::string> lines;
      for (const auto& r : rows) lines.push_back(cross_eval_row(r));
      emit_csv(xe_out, "cross_eval.csv", kCrossEvalHeader, lines);
    } else if (*bench_cmd) {
      const auto base = optional_config(bench_config);
      if (bench_variants.empty()) {
        bench_variants =
            base ? std::vector<std::string>{base->variant.name()} : kAllVariants;
      }
      if (bench_ls.empty()) {
        bench_ls = base ? std::vector<std::size_t>{base->variant.history}
                        : std::vector<std::size_t>{1, 3, 6, 10, 20};
      }
      Hyperparams hp = base ? base->hyper : Hyperparams{};
      if (bench_batch) hp.batch_size = *bench_batch;
      const std::size_t hidden =
          bench_hidden.value_or(base ? base->variant.hidden : 128);
      std::vector<std::string> lines;
      for (const auto& name : bench_variants) {
        VariantSpec v = VariantSpec::parse(name);
        if (base) v.obs_dim = base->variant.obs_dim;
        v.hidden = hidden;
        const std::vector<std::size_t> ls =
            v.recurrent() ? bench_ls : std::vector<std::size_t>{1};
        for (std::size_t l : ls) {
          v.history = l;
          const BenchResult r = bench_update(v, hp, bench_samples, bench_seed);
          lines.push_back(bench_row(r, hp.batch_size));
          std::fprintf(stderr, "%s l=%zu  %.3f ms/update\n", name.c_str(),
                       r.history, r.median_ms);
        }
      }
      emit_csv(bench_out, "bench.csv", kBenchHeader, lines);
    } else if (*gc_cmd) {
      const auto base = optional_config(gc_config);
      if (gc_variants.empty()) {
        gc_variants =
            base ? std::vector<std::string>{base->variant.name()} : kAllVariants;
      }
      const std::size_t l = gc_l.value_or(base ? base->variant.history : 3);
      Rng rng = Rng::derive(gc_seed, Stream::Synthetic);
      double worst = 0.0;
      json report = json::array();
      for (const auto& name : gc_variants) {
        VariantSpec v = VariantSpec::parse(name);
        if (base) v.obs_dim = base->variant.obs_dim;
        v.hidden = gc_hidden;
        v.history = l;
        for (const char* role : {"actor", "critic"}) {
          const NetSpec spec = std::string(role) == "actor" ? actor_spec(v)
                                                            : critic_spec(v);
          Network net(spec, rng);
          const bool seeded =
              v.kind == VariantKind::HTd3 && std::string(role) == "critic";
          NetInput in =
              random_input(spec, 3, seeded ? 1 : l + 1, rng, !seeded, seeded);
          const NetworkCheck c = check_network(net, std::move(in), rng);
          worst = std::max(worst, c.worst());
          const json row{{"variant", name},
                         {"role", role},
                         {"params", c.params.checked},
                         {"param_rel_error", c.params.max_rel_error},
                         {"input_rel_error", c.inputs.max_rel_error}};
          std::cout << row.dump() << '\n';
          report.push_back(row);
        }
      }
      if (!gc_out.empty()) {
        fs::create_directories(gc_out);
        std::ofstream os(fs::path(gc_out) / "gradcheck.json", std::ios::trunc);
        os << report.dump(2) << '\n';
        if (!os) throw IoError("cannot write gradcheck.json");
      }
      if (!(worst < gc_tol)) {
        return fail("gradcheck_failed",
                    "max relative error " + format_double(worst) +
                        " exceeds " + format_double(gc_tol),
                    command);
      }
    } else if (*params_cmd) {
      std::vector<std::string> lines;
      for (const auto& name : kAllVariants) {
        VariantSpec v = VariantSpec::parse(name);
        v.obs_dim = p_obs;
        v.hidden = p_hidden;
        v.validate();
        lines.push_back(name + ',' +
                        std::to_string(actor_spec(v).param_count()) + ',' +
                        std::to_string(critic_spec(v).param_count()));
      }
      emit_csv(p_out, "params.csv", "variant,actor_params,critic_params",
               lines);
    } else if (*grid_cmd) {
      GridConfig g = grid_from_json(read_json(grid_config));
      if (!grid_out.empty()) g.out_dir = grid_out;
      if (grid_workers) g.workers = *grid_workers;
      const auto rows = run_grid(g);
      std::vector<std::string> lines;
      for (const auto& r : rows) lines.push_back(summary_row(r));
      emit_csv("", "summary.csv", kSummaryHeader, lines);
    }
  } catch (const std::exception& e) {
    return fail(error_kind(e), e.what(), command);
  }
  return 0;
}
