#pragma once

// Scenario engine. Each step runs the full cognitive loop in a fixed order:
// device mobility, cluster-center update (warm-started), device-host
// matching, graph build over active agents, control, kinematic integration,
// scheduled failures, then metrics from the freshly updated state. Metrics
// and snapshots therefore always describe the post-step state, so they can
// be recomputed from a snapshot alone.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mapsim/association.hpp"
#include "mapsim/controller.hpp"
#include "mapsim/errors.hpp"
#include "mapsim/graph.hpp"
#include "mapsim/rng.hpp"
#include "mapsim/scenario.hpp"
#include "mapsim/state.hpp"

namespace mapsim {

struct MetricsRecord {
  double t = 0.0;
  double coverage = 0.0;             // served devices / total devices
  double fiedler = 0.0;              // algebraic connectivity of active agents
  bool connected = false;            // fiedler > kConnectivityTol
  double mean_epidemic_bound = 0.0;  // mean over active agents
  double max_u_norm = 0.0;           // largest control magnitude this step
  int active_maps = 0;
};

enum class StepPhase {
  Mobility,
  Clustering,
  Matching,
  GraphBuild,
  Control,
  Integrate,
  Failure,
  Metrics,
};

// Post-step state handed to the snapshot sink. Aspirants are reported as
// original agent ids (-1 when out of range of every active agent).
struct SnapshotData {
  double t = 0.0;
  long step = 0;
  double elevation = 0.0;
  const MsdState& msds;
  const MapState& maps;
  const std::vector<int>& aspirant_map_id;
  const std::vector<bool>& served;
  const std::vector<Vec2>& centers;
};

struct RunSinks {
  std::function<void(const MetricsRecord&)> metrics;
  std::function<void(const SnapshotData&)> snapshot;
  std::function<void(StepPhase)> phase;  // test instrumentation
  double snapshot_every = 1.0;           // seconds; <= 0 disables cadence snapshots
};

struct RunSummary {
  int steps = 0;
  MetricsRecord final{};
  bool converged = false;  // final max control norm below convergence_tol
  double wall_seconds = 0.0;
};

inline MsdState sample_msds(const std::vector<GmmComponent>& gmm, int m, RngStream& rng) {
  // Cholesky factors of the 2x2 covariances, closed form.
  struct Factor {
    double a11, a21, a22;
    Vec2 mean;
    double cum_weight;
  };
  std::vector<Factor> factors;
  factors.reserve(gmm.size());
  double cum = 0.0;
  for (const auto& comp : gmm) {
    const double a11 = std::sqrt(comp.cov(0, 0));
    const double a21 = comp.cov(1, 0) / a11;
    const double a22 = std::sqrt(comp.cov(1, 1) - a21 * a21);
    if (!std::isfinite(a11) || !std::isfinite(a22)) {
      throw ConfigError("gmm covariance is not positive definite");
    }
    cum += comp.weight;
    factors.push_back({a11, a21, a22, comp.mean, cum});
  }

  MsdState out;
  out.y.resize(m);
  for (int i = 0; i < m; ++i) {
    const double pick = rng.uniform01() * cum;
    std::size_t c = 0;
    while (c + 1 < factors.size() && pick >= factors[c].cum_weight) ++c;
    const auto [z1, z2] = rng.normal_pair();
    const auto& f = factors[c];
    out.y[i] = f.mean + Vec2(f.a11 * z1, f.a21 * z1 + f.a22 * z2);
  }
  return out;
}

// Uniform positions over the configured region (device bounding box inflated
// by r when unset), uniform per-component velocities, everyone active.
inline MapState init_maps(const ScenarioConfig& cfg, const MsdState& msds, RngStream& rng) {
  Box2 region;
  if (cfg.map_init_region) {
    region = *cfg.map_init_region;
  } else {
    Vec2 lo(0.0, 0.0), hi(0.0, 0.0);
    if (!msds.y.empty()) {
      lo = hi = msds.y.front();
      for (const Vec2& y : msds.y) {
        lo = lo.cwiseMin(y);
        hi = hi.cwiseMax(y);
      }
    }
    region = Box2{lo, hi}.inflated(cfg.kernel.r);
  }

  MapState out;
  out.q.resize(cfg.l);
  out.p.resize(cfg.l);
  out.active.assign(cfg.l, true);
  for (int i = 0; i < cfg.l; ++i) {
    out.q[i] = Vec2(rng.uniform(region.lo.x(), region.hi.x()),
                    rng.uniform(region.lo.y(), region.hi.y()));
    out.p[i] = Vec2(rng.uniform(cfg.vel_lo, cfg.vel_hi),
                    rng.uniform(cfg.vel_lo, cfg.vel_hi));
  }
  return out;
}

// Additive noise, each component uniform on [-s, s], fresh per device.
inline void mobility_step(MsdState& msds, double s, RngStream& rng) {
  if (s == 0.0) return;
  for (Vec2& y : msds.y) {
    y.x() += s * rng.uniform(-1.0, 1.0);
    y.y() += s * rng.uniform(-1.0, 1.0);
  }
}

// Semi-implicit Euler: velocity first, then position with the new velocity.
inline void integrate_step(MapState& state, const ControlInput& input, double delta) {
  for (int i = 0; i < state.size(); ++i) {
    if (!state.active[i]) continue;
    const Vec2& u = input.u[i];
    if (!std::isfinite(u.x()) || !std::isfinite(u.y())) {
      throw SimulationError("non-finite control input for agent " + std::to_string(i));
    }
    state.p[i] += delta * u;
    state.q[i] += delta * state.p[i];
  }
}

// Marks floor(fraction * active_count) uniformly sampled active agents
// inactive (without replacement). Returns the number of newly failed agents.
inline int apply_failure(MapState& state, double fraction, RngStream& rng) {
  std::vector<int> ids = state.active_ids();
  const int count = static_cast<int>(std::floor(fraction * static_cast<double>(ids.size())));
  for (int t = 0; t < count; ++t) {  // partial Fisher-Yates
    const int j = t + static_cast<int>(rng.below(static_cast<std::uint64_t>(ids.size() - t)));
    std::swap(ids[t], ids[j]);
    state.active[ids[t]] = false;
  }
  return count;
}

namespace detail {

struct ActiveView {
  std::vector<int> ids;
  std::vector<Vec2> positions;
};

inline ActiveView gather_active(const MapState& maps) {
  ActiveView view;
  view.ids = maps.active_ids();
  view.positions.reserve(view.ids.size());
  for (int id : view.ids) view.positions.push_back(maps.q[id]);
  return view;
}

}  // namespace detail

inline RunSummary run_scenario(const ScenarioConfig& cfg, const RunSinks& sinks) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  RngStream msd_init(cfg.seed, "msd-init");
  RngStream map_init(cfg.seed, "map-init");
  RngStream mobility(cfg.seed, "mobility");
  RngStream failure(cfg.seed, "failure");
  RngStream clustering(cfg.seed, "clustering");

  MsdState msds = sample_msds(cfg.gmm, cfg.m, msd_init);
  MapState maps = init_maps(cfg, msds, map_init);
  const ControlParams cp = cfg.control();

  const int steps = cfg.horizon > 0.0
                        ? static_cast<int>(std::ceil(cfg.horizon / cfg.ts - 1e-9))
                        : 0;

  // Failure events indexed by the step whose time window (t - ts, t] contains
  // them; events before the first step fire on step 1.
  std::map<int, std::vector<double>> failure_steps;
  for (const FailureEvent& ev : cfg.failures) {
    const int at = std::max(1, static_cast<int>(std::ceil(ev.time / cfg.ts - 1e-9)));
    if (at <= steps) failure_steps[at].push_back(ev.fraction);
  }

  const long cadence = sinks.snapshot_every > 0.0
                           ? std::max<long>(1, std::lround(sinks.snapshot_every / cfg.ts))
                           : 0;
  const auto snapshot_due = [&](long step) {
    if (!sinks.snapshot) return false;
    if (step == 0) return true;
    if (cadence > 0 && step % cadence == 0) return true;
    // Forced immediately before and after each failure event.
    const int next = static_cast<int>(step) + 1;
    return failure_steps.count(static_cast<int>(step)) > 0 || failure_steps.count(next) > 0;
  };

  const auto emit_snapshot = [&](double t, long step, const Matching& matching,
                                 const detail::ActiveView& view, const ClusterSet& centers) {
    std::vector<int> aspirant_global(msds.y.size(), -1);
    for (std::size_t i = 0; i < aspirant_global.size(); ++i) {
      const int local = matching.aspirant_of[i];
      if (local >= 0) aspirant_global[i] = view.ids[local];
    }
    const SnapshotData data{t,    step,         cfg.h,           msds,
                            maps, aspirant_global, matching.served, centers.centers};
    sinks.snapshot(data);
  };

  // Initial clustering (seeded by sampling k distinct devices) and, if a
  // snapshot sink is attached, the t = 0 snapshot.
  ClusterSet centers = lloyd_cluster(msds.y, cfg.k, {}, cfg.lloyd_max_iter, cfg.lloyd_tol,
                                     clustering);
  if (snapshot_due(0)) {
    const auto view = detail::gather_active(maps);
    const Matching matching0 = match_msds(msds.y, view.positions, cfg.kernel.r, cfg.n_max);
    emit_snapshot(0.0, 0, matching0, view, centers);
  }

  RunSummary summary;
  summary.steps = steps;
  MetricsRecord last{};

  for (int step = 1; step <= steps; ++step) {
    const double t = static_cast<double>(step) * cfg.ts;
    const auto phase = [&](StepPhase ph) {
      if (sinks.phase) sinks.phase(ph);
    };

    phase(StepPhase::Mobility);
    mobility_step(msds, cfg.s, mobility);

    phase(StepPhase::Clustering);
    centers = lloyd_cluster(msds.y, cfg.k, centers.centers, cfg.lloyd_max_iter,
                            cfg.lloyd_tol, clustering);

    phase(StepPhase::Matching);
    auto view = detail::gather_active(maps);
    Matching matching = match_msds(msds.y, view.positions, cfg.kernel.r, cfg.n_max);

    phase(StepPhase::GraphBuild);
    GraphView graph = build_graph(view.positions, cfg.kernel, view.ids);

    phase(StepPhase::Control);
    const ControlInput input = control_input(maps, graph, matching, centers, cp);

    phase(StepPhase::Integrate);
    integrate_step(maps, input, cfg.delta);

    if (auto it = failure_steps.find(step); it != failure_steps.end()) {
      phase(StepPhase::Failure);
      for (double fraction : it->second) apply_failure(maps, fraction, failure);
    }

    phase(StepPhase::Metrics);
    view = detail::gather_active(maps);
    matching = match_msds(msds.y, view.positions, cfg.kernel.r, cfg.n_max);
    graph = build_graph(view.positions, cfg.kernel, view.ids);

    MetricsRecord rec;
    rec.t = t;
    rec.coverage = coverage_proportion(matching, cfg.m);
    rec.fiedler = fiedler_value(laplacian(graph));
    rec.connected = rec.fiedler > kConnectivityTol;
    const std::vector<double> bounds = epidemic_bound(graph.degrees, cfg.tau);
    double bound_sum = 0.0;
    for (double v : bounds) bound_sum += v;
    rec.mean_epidemic_bound = bounds.empty() ? 0.0 : bound_sum / static_cast<double>(bounds.size());
    rec.max_u_norm = input.max_norm;
    rec.active_maps = static_cast<int>(view.ids.size());
    if (!std::isfinite(rec.coverage) || !std::isfinite(rec.fiedler) ||
        !std::isfinite(rec.mean_epidemic_bound) || !std::isfinite(rec.max_u_norm)) {
      throw SimulationError("non-finite metric at t = " + std::to_string(t));
    }

    if (sinks.metrics) sinks.metrics(rec);
    if (snapshot_due(step)) emit_snapshot(t, step, matching, view, centers);
    last = rec;
  }

  summary.final = last;
  summary.converged = steps > 0 && last.max_u_norm < cfg.convergence_tol;
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

}  // namespace mapsim
