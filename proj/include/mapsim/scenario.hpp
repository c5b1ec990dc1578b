#pragma once

// Scenario description: population sizes, kernel and control parameters,
// device layout (Gaussian mixture), mobility, timing, failure schedule, and
// the master seed. validate() is the single gate for every invariant; the
// simulation assumes a validated config.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mapsim/controller.hpp"
#include "mapsim/errors.hpp"
#include "mapsim/kernels.hpp"
#include "mapsim/types.hpp"

namespace mapsim {

struct GmmComponent {
  double weight = 1.0;
  Vec2 mean{0.0, 0.0};
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
};

struct FailureEvent {
  double time = 10.0;      // seconds
  double fraction = 0.2;   // of currently active agents, in [0, 1]
};

inline std::vector<GmmComponent> default_gmm() {
  Eigen::Matrix2d s1, s2, s3;
  s1 << 200.0, 0.0, 0.0, 100.0;
  s2 << 500.0, 0.0, 0.0, 200.0;
  s3 << 150.0, 0.0, 0.0, 300.0;
  const double w = 1.0 / 3.0;
  return {{w, Vec2(30.0, 40.0), s1}, {w, Vec2(-20.0, -20.0), s2}, {w, Vec2(-80.0, 60.0), s3}};
}

struct ScenarioConfig {
  int m = 2000;            // device count
  int l = 80;              // agent count
  KernelParams kernel{};   // epsilon, gamma, r, d, a, b
  double c1 = 0.2;         // position goal gain
  double c2 = 0.1;         // velocity goal gain
  int n_max = 80;          // serving capacity per agent
  int k = 3;               // cluster count
  double h = 20.0;         // agent elevation; cosmetic, never enters dynamics
  double s = 0.2;          // device mobility scale
  double tau = 1.0;        // effective spreading rate
  double ts = 0.01;        // loop sampling interval, seconds
  double delta = 0.01;     // integration step size, seconds
  double horizon = 25.0;   // run length, seconds

  std::vector<GmmComponent> gmm = default_gmm();
  std::optional<Box2> map_init_region;      // nullopt: device bounding box + r
  double vel_lo = -2.0, vel_hi = -1.0;      // initial velocity box, per component
  std::vector<FailureEvent> failures{{10.0, 0.20}};
  std::uint64_t seed = 1;
  double convergence_tol = 1e-3;            // on the max control norm
  int lloyd_max_iter = 100;
  double lloyd_tol = 1e-6;

  ControlParams control() const { return ControlParams{kernel, c1, c2, n_max}; }

  void validate() const {
    if (m < 1) throw ConfigError("m must be a positive integer");
    if (l < 1) throw ConfigError("l must be a positive integer");
    kernel.validate();
    control().validate();
    if (k < 1) throw ConfigError("k must be a positive integer");
    if (k > m) throw ConfigError("k must not exceed the device count m");
    if (!(h >= 0.0)) throw ConfigError("h must be >= 0");
    if (!(s >= 0.0)) throw ConfigError("s must be >= 0");
    if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
    if (!(ts > 0.0)) throw ConfigError("ts must be > 0");
    if (!(delta > 0.0)) throw ConfigError("delta must be > 0");
    if (!(horizon >= 0.0)) throw ConfigError("horizon must be >= 0");
    if (horizon / ts > 1e9) throw ConfigError("horizon/ts exceeds the supported step count");
    if (gmm.empty()) throw ConfigError("gmm must have at least one component");
    double weight_sum = 0.0;
    for (std::size_t c = 0; c < gmm.size(); ++c) {
      const auto& comp = gmm[c];
      const std::string tag = "gmm[" + std::to_string(c) + "]";
      if (!(comp.weight >= 0.0)) throw ConfigError(tag + ": weight must be >= 0");
      weight_sum += comp.weight;
      const double scale = std::max({1.0, std::abs(comp.cov(0, 1)), std::abs(comp.cov(1, 0))});
      if (std::abs(comp.cov(0, 1) - comp.cov(1, 0)) > 1e-9 * scale) {
        throw ConfigError(tag + ": covariance must be symmetric");
      }
      const double det = comp.cov(0, 0) * comp.cov(1, 1) - comp.cov(0, 1) * comp.cov(1, 0);
      if (!(comp.cov(0, 0) > 0.0 && det > 0.0)) {
        throw ConfigError(tag + ": covariance must be positive definite");
      }
    }
    if (std::abs(weight_sum - 1.0) > 1e-9) {
      throw ConfigError("gmm weights must sum to 1");
    }
    if (map_init_region) {
      const auto& box = *map_init_region;
      if (!(box.lo.x() <= box.hi.x() && box.lo.y() <= box.hi.y())) {
        throw ConfigError("map_init_region must have lo <= hi per component");
      }
    }
    if (!(vel_lo <= vel_hi)) throw ConfigError("map_init_velocity_box must have lo <= hi");
    for (std::size_t f = 0; f < failures.size(); ++f) {
      const std::string tag = "failures[" + std::to_string(f) + "]";
      if (!(failures[f].time >= 0.0)) throw ConfigError(tag + ": time must be >= 0");
      if (!(failures[f].fraction >= 0.0 && failures[f].fraction <= 1.0)) {
        throw ConfigError(tag + ": fraction must be in [0,1]");
      }
    }
    if (!(convergence_tol > 0.0)) throw ConfigError("convergence_tol must be > 0");
    if (lloyd_max_iter < 1) throw ConfigError("lloyd_max_iter must be >= 1");
    if (!(lloyd_tol > 0.0)) throw ConfigError("lloyd_tol must be > 0");
  }
};

}  // namespace mapsim
