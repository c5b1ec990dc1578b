#pragma once

// Scalar kernels shared by the interaction graph and the controller:
//
//   bump(z; z1, z0)      finite-support window: 1 on [0,z1), a half-cosine
//                        taper on [z1,z0), 0 beyond z0
//   sigma_norm(x)        (sqrt(1 + eps*|x|^2) - 1) / eps, a smooth surrogate
//                        for |x| that is differentiable at the origin
//   sigma_gradient(x)    x / sqrt(1 + eps*|x|^2), gradient of sigma_norm,
//                        magnitude bounded by 1/sqrt(eps)
//   phi(z; a, b)         bounded increasing sigmoid with phi(0) = 0,
//                        range (-b, a), uneven when a != b
//   psi(z; params)       pair action bump(z/sr; gamma, 1) * phi(z - sd):
//                        repulsive below the sigma-distance of d, tapering
//                        to zero at the sigma-distance of r

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mapsim/errors.hpp"
#include "mapsim/types.hpp"

namespace mapsim {

inline double bump(double z, double z1, double z0) {
  if (z1 < 0.0 || !(z1 < z0)) {
    throw std::invalid_argument("bump: cut-offs must satisfy 0 <= z1 < z0");
  }
  if (z < z1) return 1.0;
  if (z >= z0) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (z - z1) / (z0 - z1)));
}

inline double sigma_norm(double x, double epsilon) {
  return (std::sqrt(1.0 + epsilon * x * x) - 1.0) / epsilon;
}

inline double sigma_norm(const Vec2& x, double epsilon) {
  return (std::sqrt(1.0 + epsilon * x.squaredNorm()) - 1.0) / epsilon;
}

inline Vec2 sigma_gradient(const Vec2& x, double epsilon) {
  return x / std::sqrt(1.0 + epsilon * x.squaredNorm());
}

inline double phi(double z, double a, double b) {
  const double c = std::abs(a - b) / std::sqrt(4.0 * a * b);
  const double zc = z + c;
  return 0.5 * ((a + b) * zc / std::sqrt(1.0 + zc * zc) + (a - b));
}

// Parameters of the kernels above. Validated once at configuration time; the
// kernel functions themselves stay branch-free in the hot path.
struct KernelParams {
  double epsilon = 0.1;  // sigma-norm curvature, > 0
  double gamma = 0.2;    // bump lower cut-off, in (0, 1)
  double r = 24.0;       // communication range, > 0
  double d = 20.0;       // preferred minimum separation, 0 <= d < r
  double a = 5.0;        // sigmoid bound / capacity attraction gain, > 0
  double b = 5.0;        // sigmoid shape, > 0

  double sigma_r() const { return sigma_norm(r, epsilon); }
  double sigma_d() const { return sigma_norm(d, epsilon); }

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("kernel: epsilon must be > 0");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("kernel: gamma must be in (0,1)");
    if (!(r > 0.0)) throw ConfigError("kernel: r must be > 0");
    if (!(d >= 0.0)) throw ConfigError("kernel: d must be >= 0");
    if (!(d < r)) throw ConfigError("kernel: d must be < r");
    if (!(a > 0.0)) throw ConfigError("kernel: a must be > 0");
    if (!(b > 0.0)) throw ConfigError("kernel: b must be > 0");
  }
};

inline double psi(double z, const KernelParams& kp) {
  return bump(z / kp.sigma_r(), kp.gamma, 1.0) * phi(z - kp.sigma_d(), kp.a, kp.b);
}

}  // namespace mapsim
