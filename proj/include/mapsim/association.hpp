#pragma once

// Device-to-host matching and cluster-center tracking. Every device aspires
// to its nearest in-range host; a host serves its closest aspirants up to
// capacity and the rest stay unserved (no spill-over to a farther host).
// Cluster centers of the device population are maintained with Lloyd
// iterations, warm-startable from the previous step's centers.

#include <algorithm>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "mapsim/rng.hpp"
#include "mapsim/types.hpp"

namespace mapsim {

struct Matching {
  std::vector<int> aspirant_of;        // per device: host index, or -1 if none in range
  std::vector<bool> served;            // per device
  std::vector<int> aspirants_per_map;  // per host: aspirant count
  std::vector<int> served_per_map;     // per host: min(aspirants, capacity)
};

// r is the ground influence radius (strict), n_max the per-host capacity.
// All ties break toward the lowest index.
inline Matching match_msds(std::span<const Vec2> msds, std::span<const Vec2> maps,
                           double r, int n_max) {
  const int m = static_cast<int>(msds.size());
  const int l = static_cast<int>(maps.size());
  Matching out;
  out.aspirant_of.assign(m, -1);
  out.served.assign(m, false);
  out.aspirants_per_map.assign(l, 0);
  out.served_per_map.assign(l, 0);

  std::vector<std::vector<std::pair<double, int>>> aspirants(l);  // (dist^2, device)
  const double r_sq = r * r;
  for (int i = 0; i < m; ++i) {
    double best_sq = r_sq;
    int best = -1;
    for (int j = 0; j < l; ++j) {
      const double d_sq = (msds[i] - maps[j]).squaredNorm();
      if (d_sq < best_sq) {
        best_sq = d_sq;
        best = j;
      }
    }
    if (best >= 0) {
      out.aspirant_of[i] = best;
      aspirants[best].emplace_back(best_sq, i);
    }
  }
  for (int j = 0; j < l; ++j) {
    auto& list = aspirants[j];
    out.aspirants_per_map[j] = static_cast<int>(list.size());
    const int keep = std::min<int>(n_max, static_cast<int>(list.size()));
    std::partial_sort(list.begin(), list.begin() + keep, list.end());
    for (int s = 0; s < keep; ++s) out.served[list[s].second] = true;
    out.served_per_map[j] = keep;
  }
  return out;
}

inline double coverage_proportion(const Matching& matching, int total_devices) {
  if (total_devices <= 0) {
    throw std::invalid_argument("coverage_proportion: device count must be positive");
  }
  const auto served =
      std::count(matching.served.begin(), matching.served.end(), true);
  return static_cast<double>(served) / static_cast<double>(total_devices);
}

struct ClusterSet {
  std::vector<Vec2> centers;
  std::vector<int> assignment;  // per point: cluster index
  double objective = 0.0;       // within-cluster sum of squared distances
};

inline Vec2 nearest_center(const Vec2& q, std::span<const Vec2> centers) {
  if (centers.empty()) throw std::invalid_argument("nearest_center: empty center set");
  int best = 0;
  double best_sq = (q - centers[0]).squaredNorm();
  for (int c = 1; c < static_cast<int>(centers.size()); ++c) {
    const double d_sq = (q - centers[c]).squaredNorm();
    if (d_sq < best_sq) {
      best_sq = d_sq;
      best = c;
    }
  }
  return centers[best];
}

namespace detail {

inline void assign_points(std::span<const Vec2> points, const std::vector<Vec2>& centers,
                          std::vector<int>& assignment, std::vector<int>& counts) {
  const int k = static_cast<int>(centers.size());
  counts.assign(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    int best = 0;
    double best_sq = (points[i] - centers[0]).squaredNorm();
    for (int c = 1; c < k; ++c) {
      const double d_sq = (points[i] - centers[c]).squaredNorm();
      if (d_sq < best_sq) {
        best_sq = d_sq;
        best = c;
      }
    }
    assignment[i] = best;
    ++counts[best];
  }
}

}  // namespace detail

// Lloyd iterations: nearest-center assignment alternating with centroid
// updates, until the largest center movement drops below tol or max_iter is
// reached. An empty cluster is re-seeded at the point currently farthest from
// its assigned center. When init_centers is empty, k distinct points are
// sampled with rng. The per-assignment objective sequence is non-increasing;
// pass objective_trace to capture it.
inline ClusterSet lloyd_cluster(std::span<const Vec2> points, int k,
                                std::vector<Vec2> init_centers, int max_iter, double tol,
                                RngStream& rng,
                                std::vector<double>* objective_trace = nullptr) {
  if (k < 1) throw std::invalid_argument("lloyd_cluster: k must be >= 1");
  if (max_iter < 1) throw std::invalid_argument("lloyd_cluster: max_iter must be >= 1");
  const int m = static_cast<int>(points.size());

  ClusterSet out;
  if (init_centers.empty()) {
    if (k > m) {
      throw std::invalid_argument("lloyd_cluster: k exceeds point count and no initial centers given");
    }
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    for (int t = 0; t < k; ++t) {  // partial Fisher-Yates: k distinct points
      const int j = t + static_cast<int>(rng.below(static_cast<std::uint64_t>(m - t)));
      std::swap(order[t], order[j]);
      init_centers.push_back(points[order[t]]);
    }
  } else if (static_cast<int>(init_centers.size()) != k) {
    throw std::invalid_argument("lloyd_cluster: init_centers size must equal k");
  }
  out.centers = std::move(init_centers);
  out.assignment.assign(m, 0);
  if (m == 0) return out;

  std::vector<int> counts;
  for (int iter = 0; iter < max_iter; ++iter) {
    detail::assign_points(points, out.centers, out.assignment, counts);

    // Re-seed empty clusters at the globally worst-assigned point. Steal only
    // from clusters holding at least two points, so a donor never goes empty
    // mid-pass; with fewer points than centers the surplus centers stay put.
    for (int c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      int worst = -1;
      double worst_sq = -1.0;
      for (int i = 0; i < m; ++i) {
        if (counts[out.assignment[i]] < 2) continue;
        const double d_sq = (points[i] - out.centers[out.assignment[i]]).squaredNorm();
        if (d_sq > worst_sq) {
          worst_sq = d_sq;
          worst = i;
        }
      }
      if (worst < 0) continue;
      --counts[out.assignment[worst]];
      out.centers[c] = points[worst];
      out.assignment[worst] = c;
      counts[c] = 1;
    }

    if (objective_trace) {
      double obj = 0.0;
      for (int i = 0; i < m; ++i) {
        obj += (points[i] - out.centers[out.assignment[i]]).squaredNorm();
      }
      objective_trace->push_back(obj);
    }

    std::vector<Vec2> means(k, Vec2::Zero());
    for (int i = 0; i < m; ++i) means[out.assignment[i]] += points[i];
    double movement = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        means[c] = out.centers[c];  // unused center stays put
        continue;
      }
      means[c] /= static_cast<double>(counts[c]);
      movement = std::max(movement, (means[c] - out.centers[c]).norm());
    }
    out.centers = std::move(means);
    if (movement < tol) break;
  }

  // Final assignment and objective against the final centers.
  detail::assign_points(points, out.centers, out.assignment, counts);
  out.objective = 0.0;
  for (int i = 0; i < m; ++i) {
    out.objective += (points[i] - out.centers[out.assignment[i]]).squaredNorm();
  }
  if (objective_trace) objective_trace->push_back(out.objective);
  return out;
}

}  // namespace mapsim
