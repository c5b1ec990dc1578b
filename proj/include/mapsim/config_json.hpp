#pragma once

// Configuration document handling. The on-disk format is JSON; every field is
// optional and falls back to the built-in scenario defaults. Unknown keys are
// rejected, value errors name the offending key path, and load -> save ->
// load round-trips to an identical configuration.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "mapsim/errors.hpp"
#include "mapsim/scenario.hpp"

namespace mapsim {

namespace detail {

[[noreturn]] inline void config_fail(const std::string& where, const std::string& what) {
  throw ConfigError(where.empty() ? what : where + ": " + what);
}

inline void expect_keys(const nlohmann::json& obj, const std::string& where,
                        std::initializer_list<const char*> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : keys) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) config_fail(where, "unknown key '" + it.key() + "'");
  }
}

inline double as_number(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number()) config_fail(where, "must be a number");
  return v.get<double>();
}

inline int as_int(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number_integer()) config_fail(where, "must be an integer");
  return v.get<int>();
}

inline std::uint64_t as_seed(const nlohmann::json& v, const std::string& where) {
  if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0))) {
    config_fail(where, "must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline Vec2 as_vec2(const nlohmann::json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) config_fail(where, "must be an array of two numbers");
  return Vec2(as_number(v[0], where + "[0]"), as_number(v[1], where + "[1]"));
}

}  // namespace detail

inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  using detail::as_int;
  using detail::as_number;
  using detail::as_seed;
  using detail::as_vec2;
  using detail::config_fail;

  if (!j.is_object()) throw ConfigError("config root must be an object");
  detail::expect_keys(j, "",
                      {"m", "l", "kernel", "control", "k", "h", "s", "tau", "ts", "delta",
                       "horizon", "gmm", "map_init_region", "map_init_velocity_box",
                       "failures", "seed", "convergence_tol", "lloyd_max_iter", "lloyd_tol"});

  ScenarioConfig cfg;
  if (j.contains("m")) cfg.m = as_int(j["m"], "m");
  if (j.contains("l")) cfg.l = as_int(j["l"], "l");

  if (j.contains("kernel")) {
    const auto& kj = j["kernel"];
    if (!kj.is_object()) config_fail("kernel", "must be an object");
    detail::expect_keys(kj, "kernel", {"epsilon", "gamma", "r", "d", "a", "b"});
    if (kj.contains("epsilon")) cfg.kernel.epsilon = as_number(kj["epsilon"], "kernel.epsilon");
    if (kj.contains("gamma")) cfg.kernel.gamma = as_number(kj["gamma"], "kernel.gamma");
    if (kj.contains("r")) cfg.kernel.r = as_number(kj["r"], "kernel.r");
    if (kj.contains("d")) cfg.kernel.d = as_number(kj["d"], "kernel.d");
    if (kj.contains("a")) cfg.kernel.a = as_number(kj["a"], "kernel.a");
    if (kj.contains("b")) cfg.kernel.b = as_number(kj["b"], "kernel.b");
  }

  if (j.contains("control")) {
    const auto& cj = j["control"];
    if (!cj.is_object()) config_fail("control", "must be an object");
    detail::expect_keys(cj, "control", {"c1", "c2", "n_max"});
    if (cj.contains("c1")) cfg.c1 = as_number(cj["c1"], "control.c1");
    if (cj.contains("c2")) cfg.c2 = as_number(cj["c2"], "control.c2");
    if (cj.contains("n_max")) cfg.n_max = as_int(cj["n_max"], "control.n_max");
  }

  if (j.contains("k")) cfg.k = as_int(j["k"], "k");
  if (j.contains("h")) cfg.h = as_number(j["h"], "h");
  if (j.contains("s")) cfg.s = as_number(j["s"], "s");
  if (j.contains("tau")) cfg.tau = as_number(j["tau"], "tau");
  if (j.contains("ts")) cfg.ts = as_number(j["ts"], "ts");
  if (j.contains("delta")) cfg.delta = as_number(j["delta"], "delta");
  if (j.contains("horizon")) cfg.horizon = as_number(j["horizon"], "horizon");

  if (j.contains("gmm")) {
    const auto& gj = j["gmm"];
    if (!gj.is_array()) config_fail("gmm", "must be an array of components");
    cfg.gmm.clear();
    for (std::size_t c = 0; c < gj.size(); ++c) {
      const std::string where = "gmm[" + std::to_string(c) + "]";
      const auto& comp = gj[c];
      if (!comp.is_object()) config_fail(where, "must be an object");
      detail::expect_keys(comp, where, {"weight", "mean", "cov"});
      GmmComponent out;
      if (comp.contains("weight")) out.weight = as_number(comp["weight"], where + ".weight");
      if (comp.contains("mean")) out.mean = as_vec2(comp["mean"], where + ".mean");
      if (comp.contains("cov")) {
        const auto& cov = comp["cov"];
        if (!cov.is_array() || cov.size() != 2) config_fail(where + ".cov", "must be a 2x2 matrix");
        const Vec2 row0 = as_vec2(cov[0], where + ".cov[0]");
        const Vec2 row1 = as_vec2(cov[1], where + ".cov[1]");
        out.cov << row0.x(), row0.y(), row1.x(), row1.y();
      }
      cfg.gmm.push_back(out);
    }
  }

  if (j.contains("map_init_region")) {
    const auto& rj = j["map_init_region"];
    if (rj.is_string() && rj.get<std::string>() == "auto") {
      cfg.map_init_region.reset();
    } else if (rj.is_array() && rj.size() == 2) {
      cfg.map_init_region = Box2{as_vec2(rj[0], "map_init_region[0]"),
                                 as_vec2(rj[1], "map_init_region[1]")};
    } else {
      config_fail("map_init_region", "must be \"auto\" or [[xlo,ylo],[xhi,yhi]]");
    }
  }

  if (j.contains("map_init_velocity_box")) {
    const Vec2 box = as_vec2(j["map_init_velocity_box"], "map_init_velocity_box");
    cfg.vel_lo = box.x();
    cfg.vel_hi = box.y();
  }

  if (j.contains("failures")) {
    const auto& fj = j["failures"];
    if (!fj.is_array()) config_fail("failures", "must be an array of events");
    cfg.failures.clear();
    for (std::size_t f = 0; f < fj.size(); ++f) {
      const std::string where = "failures[" + std::to_string(f) + "]";
      const auto& ev = fj[f];
      if (!ev.is_object()) config_fail(where, "must be an object");
      detail::expect_keys(ev, where, {"time", "fraction"});
      FailureEvent out;
      if (ev.contains("time")) out.time = as_number(ev["time"], where + ".time");
      if (ev.contains("fraction")) out.fraction = as_number(ev["fraction"], where + ".fraction");
      cfg.failures.push_back(out);
    }
  }

  if (j.contains("seed")) cfg.seed = as_seed(j["seed"], "seed");
  if (j.contains("convergence_tol")) {
    cfg.convergence_tol = as_number(j["convergence_tol"], "convergence_tol");
  }
  if (j.contains("lloyd_max_iter")) cfg.lloyd_max_iter = as_int(j["lloyd_max_iter"], "lloyd_max_iter");
  if (j.contains("lloyd_tol")) cfg.lloyd_tol = as_number(j["lloyd_tol"], "lloyd_tol");

  cfg.validate();
  return cfg;
}

inline nlohmann::ordered_json config_to_json(const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  j["m"] = cfg.m;
  j["l"] = cfg.l;
  j["kernel"] = {{"epsilon", cfg.kernel.epsilon}, {"gamma", cfg.kernel.gamma},
                 {"r", cfg.kernel.r},             {"d", cfg.kernel.d},
                 {"a", cfg.kernel.a},             {"b", cfg.kernel.b}};
  j["control"] = {{"c1", cfg.c1}, {"c2", cfg.c2}, {"n_max", cfg.n_max}};
  j["k"] = cfg.k;
  j["h"] = cfg.h;
  j["s"] = cfg.s;
  j["tau"] = cfg.tau;
  j["ts"] = cfg.ts;
  j["delta"] = cfg.delta;
  j["horizon"] = cfg.horizon;
  j["gmm"] = nlohmann::ordered_json::array();
  for (const auto& comp : cfg.gmm) {
    j["gmm"].push_back({{"weight", comp.weight},
                        {"mean", {comp.mean.x(), comp.mean.y()}},
                        {"cov",
                         {{comp.cov(0, 0), comp.cov(0, 1)}, {comp.cov(1, 0), comp.cov(1, 1)}}}});
  }
  if (cfg.map_init_region) {
    j["map_init_region"] = {{cfg.map_init_region->lo.x(), cfg.map_init_region->lo.y()},
                            {cfg.map_init_region->hi.x(), cfg.map_init_region->hi.y()}};
  } else {
    j["map_init_region"] = "auto";
  }
  j["map_init_velocity_box"] = {cfg.vel_lo, cfg.vel_hi};
  j["failures"] = nlohmann::ordered_json::array();
  for (const auto& ev : cfg.failures) {
    j["failures"].push_back({{"time", ev.time}, {"fraction", ev.fraction}});
  }
  j["seed"] = cfg.seed;
  j["convergence_tol"] = cfg.convergence_tol;
  j["lloyd_max_iter"] = cfg.lloyd_max_iter;
  j["lloyd_tol"] = cfg.lloyd_tol;
  return j;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("parse error in " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

inline void save_config(const ScenarioConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write config file: " + path.string());
  out << config_to_json(cfg).dump(2) << '\n';
}

}  // namespace mapsim
