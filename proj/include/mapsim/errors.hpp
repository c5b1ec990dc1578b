#pragma once

#include <stdexcept>
#include <string>

namespace mapsim {

// Invalid or inconsistent scenario configuration; maps to exit code 1 in the CLI.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runtime fault while executing a scenario (non-finite state, I/O failure);
// maps to exit code 2 in the CLI.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mapsim
