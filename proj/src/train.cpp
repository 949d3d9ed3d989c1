#include "rtd3/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "rtd3/checkpoint.hpp"
#include "rtd3/error.hpp"
#include "rtd3/evaluate.hpp"
#include "rtd3/rng.hpp"

namespace rtd3 {

namespace fs = std::filesystem;
using nlohmann::json;

double normalize_return(double x, double lo, double hi) {
  if (!(hi > lo)) throw ConfigError("normalize: hi must exceed lo");
  return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
}

double final_window_mean(const std::vector<CurvePoint>& curve,
                         std::size_t window) {
  std::size_t n = 0;
  double sum = 0.0;
  for (auto it = curve.rbegin(); it != curve.rend() && n < window; ++it) {
    if (it->status != "ok") continue;
    sum += it->eval_return_mean;
    ++n;
  }
  return n > 0 ? sum / static_cast<double>(n)
               : std::numeric_limits<double>::quiet_NaN();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string curve_row(const CurvePoint& p) {
  return std::to_string(p.env_steps) + "," + std::to_string(p.episodes) +
         "," + std::to_string(p.updates) + "," +
         format_double(p.eval_return_mean) + "," +
         format_double(p.eval_return_std) + "," +
         format_double(p.normalized_return) + "," + p.status;
}

std::uint64_t eval_seed_for(std::uint64_t run_seed) {
  return Rng::derive(run_seed, Stream::Evaluation).next_u64();
}

namespace {

using Clock = std::chrono::steady_clock;

json metadata(const RunConfig& cfg, const Agent& agent) {
  const PendulumParams p;
  return json{
      {"config", config_to_json(cfg)},
      {"code_version", RTD3_VERSION},
      {"rng", std::string(Rng::kAlgorithm)},
      {"eval_seed", eval_seed_for(cfg.seed)},
      {"dynamics",
       {{"gravity", p.gravity},
        {"mass", p.mass},
        {"length", p.length},
        {"dt", p.dt},
        {"max_speed", p.max_speed},
        {"max_torque", p.max_torque},
        {"horizon", p.horizon}}},
      {"obs_dim", cfg.variant.obs_dim},
      {"actor_params", agent.actor().param_count()},
      {"critic_params", agent.critic(0).param_count()},
      {"curve_columns", kCurveHeader},
      {"timing_columns", kTimingHeader},
  };
}

class Outputs {
 public:
  explicit Outputs(const std::string& dir) : dir_(dir) {
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
    curve_.open(fs::path(dir) / "curve.csv", std::ios::trunc);
    timing_.open(fs::path(dir) / "timing.csv", std::ios::trunc);
    if (!curve_ || !timing_) throw IoError("cannot write into '" + dir + "'");
    curve_ << kCurveHeader << '\n';
    timing_ << kTimingHeader << '\n';
    curve_.flush();
    timing_.flush();
  }
  bool enabled() const { return !dir_.empty(); }
  void point(const CurvePoint& p, double ms_per_update, double elapsed) {
    if (!enabled()) return;
    curve_ << curve_row(p) << '\n';
    curve_.flush();
    timing_ << p.env_steps << ',' << format_double(ms_per_update) << ','
            << format_double(elapsed) << '\n';
    timing_.flush();
  }
  void meta(const json& m) {
    if (!enabled()) return;
    std::ofstream os(fs::path(dir_) / "meta.json", std::ios::trunc);
    os << m.dump(2) << '\n';
    if (!os) throw IoError("cannot write meta.json in '" + dir_ + "'");
  }
  std::string path(const char* name) const {
    return (fs::path(dir_) / name).string();
  }

 private:
  std::string dir_;
  std::ofstream curve_;
  std::ofstream timing_;
};

}  // namespace

TrainResult train(const RunConfig& input, const ProgressFn& progress,
                  bool rethrow) {
  RunConfig cfg = input;
  cfg.finalize();
  const Hyperparams& hp = cfg.hyper;
  const std::uint64_t seed = cfg.seed;

  TrainResult result;
  result.agent = std::make_shared<Agent>(cfg.variant, hp, seed);
  Agent& agent = *result.agent;
  Outputs out(cfg.out_dir);
  json meta = metadata(cfg, agent);
  out.meta(meta);

  Rng reset_rng = Rng::derive(seed, Stream::EnvReset);
  Rng sched_rng = Rng::derive(seed, Stream::Disturbance);
  Rng noise_rng = Rng::derive(seed, Stream::ObservationNoise);
  Rng explore_rng = Rng::derive(seed, Stream::Exploration);
  Rng replay_rng = Rng::derive(seed, Stream::Replay);
  Rng target_rng = Rng::derive(seed, Stream::TargetNoise);
  const std::uint64_t eval_seed = eval_seed_for(seed);

  ReplayBuffer buffer(cfg.replay_capacity);
  DisturbedEnv env(cfg.scenario);
  RolloutPolicy policy(cfg.variant, cfg.rollout_memory, 1);
  const bool capture = cfg.variant.kind == VariantKind::HTd3;

  std::vector<Observation> obs{env.reset(reset_rng, sched_rng, noise_rng)};
  policy.begin(0);
  double prev_act = 0.0;
  std::size_t episodes = 0;
  double update_ms = 0.0;
  const auto started = Clock::now();
  std::size_t step = 0;

  try {
    for (step = 1; step <= cfg.total_steps; ++step) {
      const bool warmup = step <= hp.start_steps;
      PolicyDecision d;
      if (capture || !warmup) d = policy.decide(agent.actor(), obs, capture);
      double a = 0.0;
      if (warmup) {
        a = explore_rng.uniform(-hp.max_action, hp.max_action);
      } else {
        a = std::clamp(d.action[0] +
                           explore_rng.normal(0.0, hp.exploration_noise),
                       -hp.max_action, hp.max_action);
      }
      const DisturbedEnv::Step s = env.step(a, noise_rng);
      Transition tr;
      tr.obs = obs[0];
      tr.act = a;
      tr.reward = s.reward;
      tr.next_obs = s.obs;
      tr.done = s.done;
      tr.terminal = false;  // the horizon is bootstrapped through
      tr.prev_act = prev_act;
      if (capture) {
        tr.lstm_in = std::move(d.lstm_in[0]);
        tr.lstm_out = std::move(d.lstm_out[0]);
      }
      buffer.push(std::move(tr));
      policy.record(0, a);
      prev_act = a;
      obs[0] = s.obs;
      if (s.done) {
        ++episodes;
        obs[0] = env.reset(reset_rng, sched_rng, noise_rng);
        policy.begin(0);
        prev_act = 0.0;
      }

      if (!warmup && buffer.size() >= hp.batch_size) {
        for (std::size_t u = 0; u < hp.updates_per_step; ++u) {
          const auto t0 = Clock::now();
          const HistoryBatch batch = agent.sample(buffer, replay_rng);
          agent.update(batch, target_rng);
          const double ms =
              std::chrono::duration<double, std::milli>(Clock::now() - t0)
                  .count();
          const double n = static_cast<double>(agent.update_count());
          update_ms += (ms - update_ms) / n;
        }
      }

      if (step % cfg.eval_every == 0 || step == cfg.total_steps) {
        const EvalResult ev =
            evaluate(agent.actor(), cfg.variant, cfg.rollout_memory,
                     cfg.scenario, cfg.eval_episodes, eval_seed);
        CurvePoint p;
        p.env_steps = step;
        p.episodes = episodes;
        p.updates = agent.update_count();
        p.eval_return_mean = ev.mean;
        p.eval_return_std = ev.std;
        p.normalized_return = normalize_return(ev.mean, cfg.norm_lo,
                                               cfg.norm_hi);
        result.curve.push_back(p);
        const double elapsed =
            std::chrono::duration<double>(Clock::now() - started).count();
        out.point(p, update_ms, elapsed);
        if (progress) progress(p);
      }
    }
  } catch (const NumericFault& e) {
    CurvePoint p;
    p.env_steps = std::min(step, cfg.total_steps);
    p.episodes = episodes;
    p.updates = agent.update_count();
    p.eval_return_mean = std::numeric_limits<double>::quiet_NaN();
    p.eval_return_std = std::numeric_limits<double>::quiet_NaN();
    p.normalized_return = std::numeric_limits<double>::quiet_NaN();
    p.status = error_kind(e);
    result.curve.push_back(p);
    out.point(p, update_ms,
              std::chrono::duration<double>(Clock::now() - started).count());
    result.ok = false;
    result.error_kind = error_kind(e);
    result.error = e.what();
  }

  result.final_window_mean = final_window_mean(result.curve, cfg.final_window);
  result.wall_ms_per_update = update_ms;
  meta["result"] = {{"ok", result.ok},
                    {"error", result.error},
                    {"episodes", episodes},
                    {"updates", agent.update_count()},
                    {"final_window_mean", result.final_window_mean}};
  out.meta(meta);
  if (out.enabled()) {
    save_checkpoint(out.path("checkpoint.bin"), agent,
                    cfg.scenario.to_string());
  }
  if (!result.ok && rethrow) throw NumericFault(result.error);
  return result;
}

}  // namespace rtd3
