#pragma once

// Interaction graph over agent positions and the connectivity metrics derived
// from it: smooth link weights, binary adjacency with integer degrees, the
// graph Laplacian, its second-smallest eigenvalue, a traversal reachability
// oracle, and the per-node mean-field information-penetration bound.

#include <Eigen/Dense>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "mapsim/kernels.hpp"
#include "mapsim/types.hpp"

namespace mapsim {

// Algebraic connectivity below this threshold counts as disconnected.
inline constexpr double kConnectivityTol = 1e-9;

struct GraphView {
  Eigen::MatrixXd smooth_adjacency;   // tapered weights in [0,1], zero diagonal
  Eigen::MatrixXi binary_adjacency;   // 1 where smooth weight > 0
  std::vector<int> degrees;           // row sums of binary adjacency
  std::vector<int> active_index_map;  // row index -> original agent id

  int size() const { return static_cast<int>(degrees.size()); }
};

inline GraphView build_graph(std::span<const Vec2> positions, const KernelParams& kp,
                             std::vector<int> ids = {}) {
  const int n = static_cast<int>(positions.size());
  if (ids.empty()) {
    ids.resize(n);
    std::iota(ids.begin(), ids.end(), 0);
  }
  GraphView g;
  g.smooth_adjacency = Eigen::MatrixXd::Zero(n, n);
  g.binary_adjacency = Eigen::MatrixXi::Zero(n, n);
  g.degrees.assign(n, 0);
  g.active_index_map = std::move(ids);

  const double sr = kp.sigma_r();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double z = sigma_norm(Vec2(positions[j] - positions[i]), kp.epsilon);
      const double w = bump(z / sr, kp.gamma, 1.0);
      if (w > 0.0) {
        g.smooth_adjacency(i, j) = g.smooth_adjacency(j, i) = w;
        g.binary_adjacency(i, j) = g.binary_adjacency(j, i) = 1;
        ++g.degrees[i];
        ++g.degrees[j];
      }
    }
  }
  return g;
}

// Laplacian of the binary graph: degree matrix minus binary adjacency.
// Symmetric, positive semi-definite, zero row sums.
inline Eigen::MatrixXd laplacian(const GraphView& g) {
  const int n = g.size();
  Eigen::MatrixXd lap = -g.binary_adjacency.cast<double>();
  for (int i = 0; i < n; ++i) lap(i, i) = static_cast<double>(g.degrees[i]);
  return lap;
}

// Second-smallest eigenvalue of a symmetric PSD matrix (ascending order,
// counted with multiplicity). Matrices with fewer than two rows have no
// second eigenvalue and report 0.
inline double fiedler_value(const Eigen::MatrixXd& lap, double tol = kConnectivityTol) {
  if (lap.rows() != lap.cols()) {
    throw std::invalid_argument("fiedler_value: matrix must be square");
  }
  if (lap.rows() < 2) return 0.0;
  if ((lap - lap.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("fiedler_value: matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
  double lambda2 = solver.eigenvalues()(1);
  if (lambda2 < 0.0 && lambda2 >= -tol) lambda2 = 0.0;  // numerical zero
  return lambda2;
}

// Breadth-first reachability over the binary adjacency; deliberately spectral-
// free so it can cross-check the Fiedler criterion. Empty and singleton
// graphs are connected by convention.
inline bool is_connected(const GraphView& g) {
  const int n = g.size();
  if (n <= 1) return true;
  std::vector<bool> seen(n, false);
  std::vector<int> frontier{0};
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int i = frontier.back();
    frontier.pop_back();
    for (int j = 0; j < n; ++j) {
      if (g.binary_adjacency(i, j) != 0 && !seen[j]) {
        seen[j] = true;
        ++reached;
        frontier.push_back(j);
      }
    }
  }
  return reached == n;
}

// Steady-state upper bound on the per-node probability of being informed when
// messages spread at effective rate tau: 1 - 1/(1 + tau * degree), in [0, 1).
inline std::vector<double> epidemic_bound(std::span<const int> degrees, double tau) {
  std::vector<double> bounds(degrees.size());
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    bounds[i] = 1.0 - 1.0 / (1.0 + tau * static_cast<double>(degrees[i]));
  }
  return bounds;
}

}  // namespace mapsim
