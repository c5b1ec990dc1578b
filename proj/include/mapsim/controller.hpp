#pragma once

// Distributed acceleration controller for the overlay agents. Each active
// agent combines three local terms:
//
//   gradient_term       pair action along sigma-gradients: repulsion below
//                       the preferred separation plus attraction toward
//                       neighbours whose aspirant load exceeds capacity
//   velocity_consensus  smooth-weighted alignment with neighbour velocities
//   goal_term           spring toward the nearest cluster center, damped
//                       toward rest
//
// All terms use only the agent's own state, its neighbours' states and loads,
// and the shared cluster centers, so the control law is fully decentralized.

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

#include "mapsim/association.hpp"
#include "mapsim/graph.hpp"
#include "mapsim/kernels.hpp"
#include "mapsim/state.hpp"

namespace mapsim {

struct ControlParams {
  KernelParams kernel{};
  double c1 = 0.2;  // position goal gain, > 0
  double c2 = 0.1;  // velocity goal gain, > 0
  int n_max = 80;   // per-agent serving capacity, >= 1

  void validate() const {
    kernel.validate();
    if (!(c1 > 0.0)) throw ConfigError("control: c1 must be > 0");
    if (!(c2 > 0.0)) throw ConfigError("control: c2 must be > 0");
    if (n_max < 1) throw ConfigError("control: n_max must be >= 1");
  }
};

struct ControlInput {
  std::vector<Vec2> u;    // per agent; zero for inactive agents
  double max_norm = 0.0;  // max |u_i| over active agents
};

// Attraction gain toward an overloaded neighbour, in [0, a). Zero exactly
// while the neighbour has spare capacity.
inline double capacity_attraction(int aspirants, const ControlParams& cp) {
  const double over = static_cast<double>(std::max(aspirants - cp.n_max, 0));
  const double normalized = sigma_norm(over, cp.kernel.epsilon) /
                            sigma_norm(static_cast<double>(cp.n_max), cp.kernel.epsilon);
  return cp.kernel.a * (1.0 - bump(normalized, 0.0, 1.0));
}

// Indices refer to rows of the graph (active agents only).
inline Vec2 gradient_term(int i, std::span<const Vec2> positions, const GraphView& g,
                          std::span<const int> aspirants_per_map, const ControlParams& cp) {
  Vec2 acc = Vec2::Zero();
  for (int j = 0; j < g.size(); ++j) {
    if (g.binary_adjacency(i, j) == 0) continue;
    const Vec2 diff = positions[j] - positions[i];
    const double coeff = psi(sigma_norm(diff, cp.kernel.epsilon), cp.kernel) +
                         capacity_attraction(aspirants_per_map[j], cp);
    acc += coeff * sigma_gradient(diff, cp.kernel.epsilon);
  }
  return acc;
}

inline Vec2 velocity_consensus(int i, std::span<const Vec2> velocities, const GraphView& g) {
  Vec2 acc = Vec2::Zero();
  for (int j = 0; j < g.size(); ++j) {
    const double a_ij = g.smooth_adjacency(i, j);
    if (a_ij > 0.0) acc += a_ij * (velocities[j] - velocities[i]);
  }
  return acc;
}

inline Vec2 goal_term(const Vec2& q, const Vec2& p, const Vec2& q_ref,
                      const ControlParams& cp) {
  return cp.c1 * (q_ref - q) - cp.c2 * p;  // reference velocity is rest
}

// Control for every agent from one consistent snapshot: graph and matching
// must have been built from the active agents of `state` in ascending id
// order. Inactive agents receive zero input.
inline ControlInput control_input(const MapState& state, const GraphView& g,
                                  const Matching& matching, const ClusterSet& centers,
                                  const ControlParams& cp) {
  const std::vector<int> ids = state.active_ids();
  if (static_cast<int>(ids.size()) != g.size() ||
      ids.size() != matching.aspirants_per_map.size()) {
    throw std::invalid_argument("control_input: graph/matching inconsistent with state");
  }

  std::vector<Vec2> pos(ids.size()), vel(ids.size());
  for (std::size_t a = 0; a < ids.size(); ++a) {
    pos[a] = state.q[ids[a]];
    vel[a] = state.p[ids[a]];
  }

  ControlInput out;
  out.u.assign(state.size(), Vec2::Zero());
  for (std::size_t a = 0; a < ids.size(); ++a) {
    const Vec2 q_ref = nearest_center(pos[a], centers.centers);
    const Vec2 u = gradient_term(static_cast<int>(a), pos, g, matching.aspirants_per_map, cp) +
                   velocity_consensus(static_cast<int>(a), vel, g) +
                   goal_term(pos[a], vel[a], q_ref, cp);
    out.u[ids[a]] = u;
    out.max_norm = std::max(out.max_norm, u.norm());
  }
  return out;
}

}  // namespace mapsim
