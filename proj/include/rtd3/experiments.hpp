#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rtd3/agent.hpp"
#include "rtd3/config.hpp"
#include "rtd3/disturbance.hpp"
#include "rtd3/train.hpp"

namespace rtd3 {

// ---- cross-evaluation ----

struct CrossEvalRow {
  std::string scenario;
  bool training_scenario = false;
  std::size_t eval_seeds = 0;
  std::size_t episodes = 0;  // per seed
  double mean = 0.0;         // over all episodes of all seeds
  double std = 0.0;
  std::vector<double> seed_means;
  double normalized = 0.0;
};

inline constexpr const char* kCrossEvalHeader =
    "scenario,training_scenario,eval_seeds,episodes,return_mean,return_std,"
    "seed_mean_min,seed_mean_max,normalized_return";

// Evaluates `agent` on each scenario with `eval_seeds` seeds (base_seed,
// base_seed + 1, ...) of `episodes` episodes each. Rows keep the input
// order. Throws ConfigError for a scenario whose observation size does not
// fit the agent.
std::vector<CrossEvalRow> cross_eval(const Agent& agent,
                                     const std::string& training_scenario,
                                     const std::vector<DisturbanceSpec>& scenarios,
                                     std::size_t episodes,
                                     std::size_t eval_seeds,
                                     std::uint64_t base_seed,
                                     RolloutMemory memory = RolloutMemory::Window,
                                     double lo = -1700.0, double hi = 0.0);
std::string cross_eval_row(const CrossEvalRow& r);

// ---- update-time benchmark ----

struct BenchResult {
  std::string variant;
  std::size_t history = 0;
  std::size_t hidden = 0;
  double median_ms = 0.0;  // per td3_update, see bench_update()
  double mean_ms = 0.0;
  std::size_t samples = 0;
};

inline constexpr const char* kBenchHeader =
    "variant,history,hidden,batch,samples,median_ms_per_update,"
    "mean_ms_per_update";

// Times agent.update() on a replay buffer pre-filled with synthetic
// episodes (random observations, actions and, for H-TD3, stored states).
// One sample is a full delay cycle (policy_delay consecutive updates, one
// of them with the actor step) divided by policy_delay, so the median
// compares like with like. Batch sampling is outside the timed region.
BenchResult bench_update(const VariantSpec& variant, const Hyperparams& hyper,
                         std::size_t cycles, std::uint64_t seed = 0);
std::string bench_row(const BenchResult& r, std::size_t batch);

// ---- grid runner ----

struct GridConfig {
  RunConfig base;
  std::vector<std::string> variants;
  std::vector<std::string> scenarios;
  std::vector<std::size_t> histories;
  std::vector<std::uint64_t> seeds;
  std::size_t workers = 1;
  std::string out_dir;
};

struct GridRun {
  RunConfig config;
  bool ok = false;
  std::string error;
  double final_window_mean = 0.0;
};

struct GridSummaryRow {
  std::string variant;
  std::string scenario;
  std::size_t history = 0;
  std::size_t seeds = 0;
  std::size_t completed = 0;
  double final_mean = 0.0;  // mean over completed seeds of final windows
  double final_std = 0.0;   // population std over those seeds
  double normalized_mean = 0.0;
};

inline constexpr const char* kSummaryHeader =
    "variant,scenario,history,seeds,completed,final_mean,final_std,"
    "normalized_mean";

// Grid file: {"schema_version": 1, "base": {run config}, "variants": [...],
// "scenarios": [...], "history": [...], "seeds": [...], "workers": 1}.
GridConfig grid_from_json(const nlohmann::json& doc);

// Expands the grid (variants x scenarios x histories x seeds; TD3 gets a
// single history value) in that nesting order.
std::vector<RunConfig> expand_grid(const GridConfig& grid);

// Runs every cell into out_dir/<variant>/<scenario>/l<l>/seed<s>/ and
// writes out_dir/summary.csv. Failed runs are recorded and skipped in the
// aggregates; the grid continues.
std::vector<GridSummaryRow> run_grid(const GridConfig& grid,
                                     std::vector<GridRun>* runs = nullptr);
std::vector<GridSummaryRow> summarize_grid(const std::vector<GridRun>& runs,
                                           double lo, double hi);
std::string summary_row(const GridSummaryRow& r);

}  // namespace rtd3
