#pragma once

#include <Eigen/Core>

namespace mapsim {

using Vec2 = Eigen::Vector2d;

// Axis-aligned rectangle, lo <= hi componentwise.
struct Box2 {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{0.0, 0.0};

  bool contains(const Vec2& x) const {
    return x.x() >= lo.x() && x.x() <= hi.x() && x.y() >= lo.y() && x.y() <= hi.y();
  }

  Box2 inflated(double margin) const {
    return {lo - Vec2(margin, margin), hi + Vec2(margin, margin)};
  }
};

}  // namespace mapsim
