#include "rtd3/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <tuple>

#include "rtd3/error.hpp"
#include "rtd3/evaluate.hpp"
#include "rtd3/rng.hpp"

namespace rtd3 {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- cross-evaluation ----

std::vector<CrossEvalRow> cross_eval(
    const Agent& agent, const std::string& training_scenario,
    const std::vector<DisturbanceSpec>& scenarios, std::size_t episodes,
    std::size_t eval_seeds, std::uint64_t base_seed, RolloutMemory memory,
    double lo, double hi) {
  if (eval_seeds == 0) throw ConfigError("cross_eval: need >= 1 eval seed");
  const VariantSpec& v = agent.variant();
  // Check every scenario before spending time on any of them.
  for (const auto& s : scenarios) {
    if (obs_dim(s) != v.obs_dim) {
      throw ConfigError("incompatible scenario '" + s.to_string() +
                        "': observations have " +
                        std::to_string(obs_dim(s)) +
                        " elements, the checkpoint expects " +
                        std::to_string(v.obs_dim));
    }
  }
  std::vector<CrossEvalRow> rows;
  for (const auto& s : scenarios) {
    CrossEvalRow row;
    row.scenario = s.to_string();
    row.training_scenario = row.scenario == training_scenario;
    row.eval_seeds = eval_seeds;
    row.episodes = episodes;
    std::vector<double> all;
    for (std::size_t k = 0; k < eval_seeds; ++k) {
      EvalResult r = evaluate(agent.actor(), v, memory, s, episodes,
                              base_seed + k);
      row.seed_means.push_back(r.mean);
      all.insert(all.end(), r.returns.begin(), r.returns.end());
    }
    const EvalResult total = summarize(std::move(all));
    row.mean = total.mean;
    row.std = total.std;
    row.normalized = normalize_return(row.mean, lo, hi);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string cross_eval_row(const CrossEvalRow& r) {
  const auto [mn, mx] =
      std::minmax_element(r.seed_means.begin(), r.seed_means.end());
  return r.scenario + "," + (r.training_scenario ? "1" : "0") + "," +
         std::to_string(r.eval_seeds) + "," + std::to_string(r.episodes) +
         "," + format_double(r.mean) + "," + format_double(r.std) + "," +
         format_double(r.seed_means.empty() ? 0.0 : *mn) + "," +
         format_double(r.seed_means.empty() ? 0.0 : *mx) + "," +
         format_double(r.normalized);
}

// ---- update-time benchmark ----

namespace {

ReplayBuffer synthetic_buffer(const VariantSpec& v, std::size_t transitions,
                              Rng& rng) {
  ReplayBuffer buf(transitions);
  const bool states = v.kind == VariantKind::HTd3;
  double prev = 0.0;
  for (std::size_t i = 0; i < transitions; ++i) {
    Transition t;
    t.obs.size = v.obs_dim;
    t.next_obs.size = v.obs_dim;
    for (std::size_t k = 0; k < v.obs_dim; ++k) {
      t.obs.values[k] = rng.uniform(-1.0, 1.0);
      t.next_obs.values[k] = rng.uniform(-1.0, 1.0);
    }
    t.act = rng.uniform(-2.0, 2.0);
    t.reward = rng.uniform(-10.0, 0.0);
    t.done = (i + 1) % 200 == 0;
    t.prev_act = prev;
    prev = t.done ? 0.0 : t.act;
    if (states) {
      auto random_state = [&] {
        StoredLstmState s;
        for (std::size_t k = 0; k < v.hidden; ++k) {
          s.h.push_back(rng.uniform(-0.5, 0.5));
          s.c.push_back(rng.uniform(-0.5, 0.5));
        }
        return s;
      };
      t.lstm_in = random_state();
      t.lstm_out = random_state();
    }
    buf.push(std::move(t));
  }
  return buf;
}

}  // namespace

BenchResult bench_update(const VariantSpec& variant, const Hyperparams& hyper,
                         std::size_t cycles, std::uint64_t seed) {
  if (cycles == 0) throw ConfigError("bench: need at least one sample");
  using Clock = std::chrono::steady_clock;
  Rng data = Rng::derive(seed, Stream::Synthetic);
  Rng replay = Rng::derive(seed, Stream::Replay);
  Rng noise = Rng::derive(seed, Stream::TargetNoise);
  const ReplayBuffer buffer = synthetic_buffer(
      variant, std::max<std::size_t>(1000, hyper.batch_size), data);
  Agent agent(variant, hyper, seed);
  const std::size_t d = hyper.policy_delay;

  std::vector<double> samples;
  for (std::size_t c = 0; c <= cycles; ++c) {  // cycle 0 warms up
    std::vector<HistoryBatch> batches;
    for (std::size_t u = 0; u < d; ++u) {
      batches.push_back(agent.sample(buffer, replay));
    }
    const auto t0 = Clock::now();
    for (const auto& b : batches) agent.update(b, noise);
    const double ms =
        std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    if (c > 0) samples.push_back(ms / static_cast<double>(d));
  }
  BenchResult r;
  r.variant = variant.name();
  r.history = variant.kind == VariantKind::Td3 ? 0 : variant.history;
  r.hidden = variant.hidden;
  r.samples = samples.size();
  for (double s : samples) r.mean_ms += s / static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  r.median_ms = n % 2 == 1 ? samples[n / 2]
                           : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  return r;
}

std::string bench_row(const BenchResult& r, std::size_t batch) {
  return r.variant + "," + std::to_string(r.history) + "," +
         std::to_string(r.hidden) + "," + std::to_string(batch) + "," +
         std::to_string(r.samples) + "," + format_double(r.median_ms) + "," +
         format_double(r.mean_ms);
}

// ---- grid runner ----

namespace {

std::string path_safe(const std::string& s) {
  std::string out = s;
  for (char& ch : out) {
    const bool keep = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                      (ch >= '0' && ch <= '9') || ch == '_' || ch == '.' ||
                      ch == '-';
    if (!keep) ch = '_';
  }
  return out;
}

template <typename T>
std::vector<T> list(const json& doc, const char* key) {
  if (!doc.contains(key)) return {};
  try {
    return doc.at(key).get<std::vector<T>>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("grid key '") + key + "' must be a list");
  }
}

}  // namespace

GridConfig grid_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("grid config must be an object");
  for (const auto& [key, value] : doc.items()) {
    static const char* known[] = {"schema_version", "base",  "variants",
                                  "scenarios",      "history", "seeds",
                                  "workers",        "out"};
    if (std::find(std::begin(known), std::end(known), key) ==
        std::end(known)) {
      throw ConfigError("unknown key '" + key + "' in grid config");
    }
  }
  if (doc.value("schema_version", 0) != kConfigSchemaVersion) {
    throw ConfigError("grid config needs schema_version " +
                      std::to_string(kConfigSchemaVersion));
  }
  GridConfig g;
  json base = doc.value("base", json::object());
  base["schema_version"] = kConfigSchemaVersion;
  g.base = config_from_json(base);
  g.variants = list<std::string>(doc, "variants");
  g.scenarios = list<std::string>(doc, "scenarios");
  g.histories = list<std::size_t>(doc, "history");
  g.seeds = list<std::uint64_t>(doc, "seeds");
  g.workers = doc.value("workers", std::size_t{1});
  g.out_dir = doc.value("out", std::string());
  if (g.variants.empty()) g.variants = {g.base.variant.name()};
  if (g.scenarios.empty()) g.scenarios = {g.base.scenario.to_string()};
  if (g.histories.empty()) g.histories = {g.base.variant.history};
  if (g.seeds.empty()) g.seeds = {g.base.seed};
  if (g.workers == 0) throw ConfigError("grid workers must be >= 1");
  return g;
}

std::vector<RunConfig> expand_grid(const GridConfig& grid) {
  std::vector<RunConfig> runs;
  for (const auto& vname : grid.variants) {
    for (const auto& sname : grid.scenarios) {
      const VariantSpec probe = VariantSpec::parse(vname);
      std::vector<std::size_t> hs = grid.histories;
      if (!probe.recurrent()) hs = {grid.histories.front()};
      for (std::size_t l : hs) {
        for (std::uint64_t seed : grid.seeds) {
          RunConfig c = grid.base;
          c.variant = VariantSpec::parse(vname);
          c.variant.hidden = grid.base.variant.hidden;
          c.variant.history = l;
          c.scenario = DisturbanceSpec::parse(sname);
          c.seed = seed;
          c.finalize();
          if (!grid.out_dir.empty()) {
            c.out_dir = (fs::path(grid.out_dir) / path_safe(c.variant.name()) /
                         path_safe(c.scenario.to_string()) /
                         ("l" + std::to_string(probe.recurrent() ? l : 0)) /
                         ("seed" + std::to_string(seed)))
                            .string();
          } else {
            c.out_dir.clear();
          }
          runs.push_back(std::move(c));
        }
      }
    }
  }
  return runs;
}

std::vector<GridSummaryRow> summarize_grid(const std::vector<GridRun>& runs,
                                           double lo, double hi) {
  using Key = std::tuple<std::string, std::string, std::size_t>;
  std::vector<Key> order;
  std::map<Key, std::vector<const GridRun*>> cells;
  for (const auto& r : runs) {
    const std::size_t l =
        r.config.variant.recurrent() ? r.config.variant.history : 0;
    Key k{r.config.variant.name(), r.config.scenario.to_string(), l};
    if (!cells.contains(k)) order.push_back(k);
    cells[k].push_back(&r);
  }
  std::vector<GridSummaryRow> rows;
  for (const auto& k : order) {
    GridSummaryRow row;
    std::tie(row.variant, row.scenario, row.history) = k;
    std::vector<double> finals;
    for (const GridRun* r : cells[k]) {
      ++row.seeds;
      if (r->ok && std::isfinite(r->final_window_mean)) {
        finals.push_back(r->final_window_mean);
      }
    }
    row.completed = finals.size();
    if (!finals.empty()) {
      for (double f : finals) row.final_mean += f;
      row.final_mean /= static_cast<double>(finals.size());
      for (double f : finals) {
        row.final_std += (f - row.final_mean) * (f - row.final_mean);
      }
      row.final_std = std::sqrt(row.final_std / static_cast<double>(finals.size()));
      row.normalized_mean = normalize_return(row.final_mean, lo, hi);
    } else {
      row.final_mean = row.final_std = row.normalized_mean =
          std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

std::string summary_row(const GridSummaryRow& r) {
  return r.variant + "," + r.scenario + "," + std::to_string(r.history) +
         "," + std::to_string(r.seeds) + "," + std::to_string(r.completed) +
         "," + format_double(r.final_mean) + "," +
         format_double(r.final_std) + "," + format_double(r.normalized_mean);
}

std::vector<GridSummaryRow> run_grid(const GridConfig& grid,
                                     std::vector<GridRun>* runs_out) {
  const std::vector<RunConfig> configs = expand_grid(grid);
  std::vector<GridRun> runs(configs.size());
  const auto n = static_cast<long>(configs.size());
  // Runs are independent; each worker owns its agent, buffer and streams.
#pragma omp parallel for schedule(dynamic, 1) \
    num_threads(static_cast<int>(grid.workers))
  for (long i = 0; i < n; ++i) {
    GridRun& r = runs[static_cast<std::size_t>(i)];
    r.config = configs[static_cast<std::size_t>(i)];
    try {
      const TrainResult t = train(r.config, {}, false);
      r.ok = t.ok;
      r.error = t.error;
      r.final_window_mean = t.final_window_mean;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = error_kind(e) + ": " + e.what();
    }
  }
  const auto rows =
      summarize_grid(runs, grid.base.norm_lo, grid.base.norm_hi);
  if (!grid.out_dir.empty()) {
    fs::create_directories(grid.out_dir);
    std::ofstream os(fs::path(grid.out_dir) / "summary.csv", std::ios::trunc);
    os << kSummaryHeader << '\n';
    for (const auto& r : rows) os << summary_row(r) << '\n';
    std::ofstream failures(fs::path(grid.out_dir) / "failures.csv",
                           std::ios::trunc);
    failures << "variant,scenario,history,seed,error\n";
    for (const auto& r : runs) {
      if (r.ok) continue;
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      failures << r.config.variant.name() << ',' << r.config.scenario.to_string()
               << ',' << r.config.variant.history << ',' << r.config.seed
               << ',' << msg << '\n';
    }
    if (!os || !failures) throw IoError("cannot write grid summary");
  }
  if (runs_out) *runs_out = std::move(runs);
  return rows;
}

}  // namespace rtd3
