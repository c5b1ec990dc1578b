#pragma once

// Output emission: the per-step metrics series as CSV and full state
// snapshots as JSON documents. Formatting is fixed-width-free but
// deterministic; identical runs produce byte-identical files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>

#include <json.hpp>

#include "mapsim/errors.hpp"
#include "mapsim/simulation.hpp"

namespace mapsim {

inline constexpr const char* kMetricsHeader =
    "t,coverage,fiedler,connected,mean_epidemic_bound,max_u_norm,active_maps";

// Streaming CSV writer; one row per step, reals with 12 significant digits.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw SimulationError("cannot open metrics file: " + path.string());
    out_ << kMetricsHeader << '\n';
  }

  void write(const MetricsRecord& r) {
    char buf[192];
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%d,%.12g,%.12g,%d\n", r.t, r.coverage,
                  r.fiedler, r.connected ? 1 : 0, r.mean_epidemic_bound, r.max_u_norm,
                  r.active_maps);
    out_ << buf;
    if (!out_) throw SimulationError("metrics write failed");
  }

  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

inline void write_metrics(std::span<const MetricsRecord> records,
                          const std::filesystem::path& path) {
  MetricsWriter writer(path);
  for (const MetricsRecord& r : records) writer.write(r);
  writer.flush();
}

// One JSON document per snapshot under `dir`, named by step index. Contains
// everything needed to re-render a configuration plot or recompute the
// matching: device positions with their host assignment, agent kinematics and
// active flags, and the cluster centers.
inline std::filesystem::path export_snapshot(const SnapshotData& snap,
                                             const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw SimulationError("cannot create snapshot directory: " + dir.string());

  nlohmann::ordered_json j;
  j["t"] = snap.t;
  j["step"] = snap.step;
  j["h"] = snap.elevation;
  j["centers"] = nlohmann::ordered_json::array();
  for (const Vec2& c : snap.centers) j["centers"].push_back({c.x(), c.y()});
  j["maps"] = nlohmann::ordered_json::array();
  for (int i = 0; i < snap.maps.size(); ++i) {
    j["maps"].push_back({{"id", i},
                         {"q", {snap.maps.q[i].x(), snap.maps.q[i].y()}},
                         {"p", {snap.maps.p[i].x(), snap.maps.p[i].y()}},
                         {"active", static_cast<bool>(snap.maps.active[i])}});
  }
  j["msds"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < snap.msds.y.size(); ++i) {
    nlohmann::ordered_json row = {{"y", {snap.msds.y[i].x(), snap.msds.y[i].y()}}};
    if (snap.aspirant_map_id[i] >= 0) {
      row["map"] = snap.aspirant_map_id[i];
    } else {
      row["map"] = nullptr;
    }
    row["served"] = static_cast<bool>(snap.served[i]);
    j["msds"].push_back(row);
  }

  char name[32];
  std::snprintf(name, sizeof name, "snapshot_%07ld.json", snap.step);
  const std::filesystem::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SimulationError("cannot open snapshot file: " + path.string());
  out << j.dump() << '\n';
  if (!out) throw SimulationError("snapshot write failed: " + path.string());
  return path;
}

}  // namespace mapsim
