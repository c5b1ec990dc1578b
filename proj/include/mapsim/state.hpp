#pragma once

#include <vector>

#include "mapsim/types.hpp"

namespace mapsim {

// Kinematic state of the overlay agents. Inactive entries are frozen: they
// are never integrated and never enter matching, graphs, control, or metrics.
struct MapState {
  std::vector<Vec2> q;       // positions
  std::vector<Vec2> p;       // velocities
  std::vector<bool> active;

  int size() const { return static_cast<int>(q.size()); }

  int active_count() const {
    int n = 0;
    for (bool a : active) n += a ? 1 : 0;
    return n;
  }

  std::vector<int> active_ids() const {
    std::vector<int> ids;
    ids.reserve(q.size());
    for (int i = 0; i < size(); ++i) {
      if (active[i]) ids.push_back(i);
    }
    return ids;
  }
};

// Positions of the underlay devices.
struct MsdState {
  std::vector<Vec2> y;
};

}  // namespace mapsim
