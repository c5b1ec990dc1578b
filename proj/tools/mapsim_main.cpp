// Command-line driver: single scenario runs, failure-level sweeps, and
// config validation. Exit codes: 0 success, 1 configuration error, 2
// simulation fault.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mapsim/config_json.hpp"
#include "mapsim/metrics_io.hpp"
#include "mapsim/simulation.hpp"

namespace fs = std::filesystem;
using namespace mapsim;

namespace {

nlohmann::ordered_json record_to_json(const MetricsRecord& r) {
  return {{"t", r.t},
          {"coverage", r.coverage},
          {"fiedler", r.fiedler},
          {"connected", r.connected},
          {"mean_epidemic_bound", r.mean_epidemic_bound},
          {"max_u_norm", r.max_u_norm},
          {"active_maps", r.active_maps}};
}

void write_json(const nlohmann::ordered_json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SimulationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Runs one scenario, writing metrics.csv, optional snapshots/, and
// summary.json under out_dir. Optionally captures the metric series.
RunSummary execute_run(const ScenarioConfig& cfg, const fs::path& out_dir,
                       double snapshot_every, std::vector<MetricsRecord>* series) {
  fs::create_directories(out_dir);
  MetricsWriter writer(out_dir / "metrics.csv");

  RunSinks sinks;
  sinks.metrics = [&](const MetricsRecord& r) {
    writer.write(r);
    if (series) series->push_back(r);
  };
  const fs::path snap_dir = out_dir / "snapshots";
  if (snapshot_every > 0.0) {
    sinks.snapshot_every = snapshot_every;
    sinks.snapshot = [&snap_dir](const SnapshotData& s) { export_snapshot(s, snap_dir); };
  } else {
    sinks.snapshot = nullptr;
  }

  RunSummary summary;
  try {
    summary = run_scenario(cfg, sinks);
  } catch (...) {
    writer.flush();  // keep the partial series readable
    throw;
  }
  writer.flush();

  nlohmann::ordered_json j;
  j["steps"] = summary.steps;
  j["converged"] = summary.converged;
  j["wall_seconds"] = summary.wall_seconds;
  j["final"] = record_to_json(summary.final);
  write_json(j, out_dir / "summary.json");
  return summary;
}

struct SeriesStats {
  double pre_coverage = 0.0;       // mean coverage over [t_fail/2, t_fail)
  double post_min_coverage = 0.0;  // min coverage at or after t_fail
  double recovered_coverage = 0.0; // mean coverage over the final second
  double recovery_ratio = 0.0;
  double pre_epidemic = 0.0;
  double recovered_epidemic = 0.0;
  double final_fiedler = 0.0;
  bool final_connected = false;
};

SeriesStats summarize_series(const std::vector<MetricsRecord>& series, double t_fail,
                             double horizon) {
  SeriesStats st;
  double pre_cov = 0.0, pre_epi = 0.0, rec_cov = 0.0, rec_epi = 0.0;
  int pre_n = 0, rec_n = 0;
  double post_min = 1.0;
  bool post_seen = false;
  for (const MetricsRecord& r : series) {
    if (r.t >= t_fail / 2.0 && r.t < t_fail) {
      pre_cov += r.coverage;
      pre_epi += r.mean_epidemic_bound;
      ++pre_n;
    }
    if (r.t >= t_fail) {
      post_min = std::min(post_min, r.coverage);
      post_seen = true;
    }
    if (r.t > horizon - 1.0) {
      rec_cov += r.coverage;
      rec_epi += r.mean_epidemic_bound;
      ++rec_n;
    }
  }
  if (pre_n > 0) {
    st.pre_coverage = pre_cov / pre_n;
    st.pre_epidemic = pre_epi / pre_n;
  }
  if (rec_n > 0) {
    st.recovered_coverage = rec_cov / rec_n;
    st.recovered_epidemic = rec_epi / rec_n;
  }
  st.post_min_coverage = post_seen ? post_min : 0.0;
  st.recovery_ratio = st.pre_coverage > 0.0 ? st.recovered_coverage / st.pre_coverage : 0.0;
  if (!series.empty()) {
    st.final_fiedler = series.back().fiedler;
    st.final_connected = series.back().connected;
  }
  return st;
}

int run_command(const std::string& config_path, const std::string& out_dir,
                std::optional<std::uint64_t> seed, double snapshot_every) {
  ScenarioConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  const RunSummary summary = execute_run(cfg, out_dir, snapshot_every, nullptr);
  std::printf("completed %d steps in %.2f s; final coverage %.4f, fiedler %.6g, %s\n",
              summary.steps, summary.wall_seconds, summary.final.coverage,
              summary.final.fiedler, summary.converged ? "converged" : "not converged");
  return 0;
}

int sweep_command(const std::string& config_path, const std::string& out_dir,
                  std::vector<double> levels, int seeds) {
  const ScenarioConfig base = load_config(config_path);
  if (seeds < 1) throw ConfigError("--seeds must be >= 1");
  for (double level : levels) {
    if (level < 0.0 || level > 1.0) throw ConfigError("failure levels must be in [0,1]");
  }
  const double t_fail = base.failures.empty() ? 10.0 : base.failures.front().time;

  struct Job {
    double level;
    std::uint64_t seed;
    fs::path dir;
    SeriesStats stats;
    std::exception_ptr error;
  };
  std::vector<Job> jobs;
  for (double level : levels) {
    char level_name[32];
    std::snprintf(level_name, sizeof level_name, "level_%.2f", level);
    for (int s = 1; s <= seeds; ++s) {
      jobs.push_back({level, static_cast<std::uint64_t>(s),
                      fs::path(out_dir) / level_name / ("seed_" + std::to_string(s)),
                      {},
                      nullptr});
    }
  }

  std::atomic<std::size_t> next{0};
  const unsigned workers =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(jobs.size())));
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      Job& job = jobs[i];
      try {
        ScenarioConfig cfg = base;
        cfg.seed = job.seed;
        cfg.failures = {{t_fail, job.level}};
        std::vector<MetricsRecord> series;
        execute_run(cfg, job.dir, 0.0, &series);
        job.stats = summarize_series(series, t_fail, cfg.horizon);
      } catch (...) {
        job.error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  for (const Job& job : jobs) {
    if (job.error) std::rethrow_exception(job.error);
  }

  nlohmann::ordered_json agg;
  agg["failure_time"] = t_fail;
  agg["seeds"] = seeds;
  agg["levels"] = nlohmann::ordered_json::array();
  std::size_t idx = 0;
  for (double level : levels) {
    nlohmann::ordered_json per_level;
    per_level["level"] = level;
    per_level["runs"] = nlohmann::ordered_json::array();
    double pre = 0.0, post_min = 0.0, recovered = 0.0, ratio = 0.0, epi_ratio = 0.0;
    int connected_count = 0;
    for (int s = 1; s <= seeds; ++s, ++idx) {
      const SeriesStats& st = jobs[idx].stats;
      per_level["runs"].push_back(
          {{"seed", s},
           {"pre_failure_coverage", st.pre_coverage},
           {"post_failure_min_coverage", st.post_min_coverage},
           {"recovered_coverage", st.recovered_coverage},
           {"recovery_ratio", st.recovery_ratio},
           {"pre_failure_epidemic_bound", st.pre_epidemic},
           {"recovered_epidemic_bound", st.recovered_epidemic},
           {"final_fiedler", st.final_fiedler},
           {"final_connected", st.final_connected}});
      pre += st.pre_coverage;
      post_min += st.post_min_coverage;
      recovered += st.recovered_coverage;
      ratio += st.recovery_ratio;
      epi_ratio += st.pre_epidemic > 0.0 ? st.recovered_epidemic / st.pre_epidemic : 0.0;
      connected_count += st.final_connected ? 1 : 0;
    }
    const double n = static_cast<double>(seeds);
    per_level["mean_pre_failure_coverage"] = pre / n;
    per_level["mean_post_failure_min_coverage"] = post_min / n;
    per_level["mean_recovered_coverage"] = recovered / n;
    per_level["mean_recovery_ratio"] = ratio / n;
    per_level["mean_epidemic_recovery_ratio"] = epi_ratio / n;
    per_level["final_connected_count"] = connected_count;
    agg["levels"].push_back(per_level);
  }
  fs::create_directories(out_dir);
  write_json(agg, fs::path(out_dir) / "sweep_summary.json");
  std::printf("sweep complete: %zu runs, summary at %s\n", jobs.size(),
              (fs::path(out_dir) / "sweep_summary.json").c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-organizing overlay network simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  double snapshot_every = 1.0;
  std::vector<double> levels{0.1, 0.2, 0.3, 0.4};
  int seeds = 5;

  CLI::App* run = app.add_subcommand("run", "Execute one scenario");
  run->add_option("--config", config_path, "Scenario config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--snapshot-every", snapshot_every,
                  "Snapshot cadence in seconds (0 disables snapshots)");

  CLI::App* sweep = app.add_subcommand("sweep", "Run a failure-level sweep");
  sweep->add_option("--config", config_path, "Scenario config (JSON)")->required();
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--failure-levels", levels, "Failure fractions to sweep")
      ->delimiter(',');
  sweep->add_option("--seeds", seeds, "Number of seeds per level (1..N)");

  CLI::App* validate = app.add_subcommand("validate", "Parse and check a config");
  validate->add_option("--config", config_path, "Scenario config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return run_command(config_path, out_dir, seed, snapshot_every);
    if (sweep->parsed()) return sweep_command(config_path, out_dir, levels, seeds);
    if (validate->parsed()) {
      load_config(config_path);
      std::printf("config OK: %s\n", config_path.c_str());
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const SimulationError& e) {
    std::cerr << "simulation fault: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
