#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rtd3/agent.hpp"
#include "rtd3/config.hpp"

namespace rtd3 {

struct CurvePoint {
  std::size_t env_steps = 0;
  std::size_t episodes = 0;
  std::uint64_t updates = 0;
  double eval_return_mean = 0.0;
  double eval_return_std = 0.0;
  double normalized_return = 0.0;
  std::string status = "ok";  // "ok" or the error kind of a failed run
};

// Column order of curve.csv.
inline constexpr const char* kCurveHeader =
    "env_steps,episodes,updates,eval_return_mean,eval_return_std,"
    "normalized_return,status";
// Column order of timing.csv (wall-clock, kept apart from curve.csv so the
// curve stays bit-reproducible).
inline constexpr const char* kTimingHeader =
    "env_steps,wall_ms_per_update,wall_s_elapsed";

struct TrainResult {
  std::vector<CurvePoint> curve;
  double final_window_mean = 0.0;  // mean of the last final_window points
  double wall_ms_per_update = 0.0;
  bool ok = true;
  std::string error_kind;
  std::string error;
  std::shared_ptr<Agent> agent;
};

using ProgressFn = std::function<void(const CurvePoint&)>;

// Runs one training run. With a non-empty cfg.out_dir writes curve.csv,
// timing.csv, meta.json and checkpoint.bin there. A numeric fault ends the
// run with an error row in curve.csv; it is reported in the result and, with
// `rethrow`, raised again after the files are written.
TrainResult train(const RunConfig& cfg, const ProgressFn& progress = {},
                  bool rethrow = true);

double normalize_return(double x, double lo, double hi);
double final_window_mean(const std::vector<CurvePoint>& curve,
                         std::size_t window);

std::string format_double(double v);
std::string curve_row(const CurvePoint& p);
// The run's eval stream seed, fixed for every eval point of the run.
std::uint64_t eval_seed_for(std::uint64_t run_seed);

}  // namespace rtd3
