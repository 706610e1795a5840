// Copyright 2026 The twintrap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "twintrap/csv.hpp"
#include "twintrap/dynamics.hpp"
#include "twintrap/pumping.hpp"
#include "twintrap/twin_state.hpp"

namespace twintrap {

/// What a scenario computes and which table it writes.
enum class ScenarioKind {
  trajectory,   // single trajectory: t, beta, n1, n2
  scatter,      // (f, beta) cloud after burn-in
  p_sweep,      // time-averaged visibility against occupancy ratio
  ensemble,     // ensemble-mean visibility series
  kappa_sweep,  // averaged state parameters against collision rate
  revival,      // detections, then collisional evolution with collapse fits
  oracle,       // trajectory ensemble against the dense master equation
};

/// How a kappa sweep reduces each ensemble to one row.
enum class SweepStatistic { final_time, time_average };

inline std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::trajectory: return "trajectory";
    case ScenarioKind::scatter: return "scatter";
    case ScenarioKind::p_sweep: return "p_sweep";
    case ScenarioKind::ensemble: return "ensemble";
    case ScenarioKind::kappa_sweep: return "kappa_sweep";
    case ScenarioKind::revival: return "revival";
    case ScenarioKind::oracle: return "oracle";
  }
  return "?";
}

inline std::string_view to_string(SweepStatistic s) {
  return s == SweepStatistic::final_time ? "final_time" : "time_average";
}

inline std::string_view to_string(GainModel g) { return g == GainModel::stimulated ? "stimulated" : "constant"; }

inline std::string_view to_string(DetectionMeasure d) {
  return d == DetectionMeasure::normalized ? "normalized" : "bare";
}

struct ScenarioConfig {
  std::string scenario = "custom";
  ScenarioKind kind = ScenarioKind::ensemble;

  std::int64_t n1 = 100;
  std::int64_t n2 = 100;
  std::int64_t initial_detections = 0;

  RateConfig rates{.n_bath1 = 1e6, .n_bath2 = 1e6};
  PumpMode pump_mode = PumpMode::none;
  double target1 = 0.0;  // 0: use the occupancy at the start of the evolution
  double target2 = 0.0;

  double horizon = 10.0;
  double grid_dt = 0.01;
  double burn_in = 0.0;
  double truncation = kDefaultTruncation;
  std::int64_t n_traj = 200;
  std::uint64_t seed = 1;
  std::int64_t threads = 0;  // 0: TWINTRAP_THREADS or hardware concurrency
  std::string output = ".";

  std::vector<double> kappa_values;
  std::vector<double> p_values;
  double total_target = 200.0;
  SweepStatistic statistic = SweepStatistic::final_time;
  std::int64_t scatter_cap = 10000;
  std::int64_t oracle_nmax = 14;
  std::int64_t oracle_points = 10;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
  T x{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError("invalid value for `" + std::string(key) + "`: '" + std::string(v) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(x)) throw ConfigError("`" + std::string(key) + "` must be finite");
  }
  return x;
}

inline void require(bool ok, std::string_view key, std::string_view what) {
  if (!ok) throw ConfigError("`" + std::string(key) + "` " + std::string(what));
}

inline double nonneg(std::string_view key, std::string_view v) {
  const double x = parse_number<double>(key, v);
  require(x >= 0.0, key, "must be >= 0");
  return x;
}

inline double positive(std::string_view key, std::string_view v) {
  const double x = parse_number<double>(key, v);
  require(x > 0.0, key, "must be > 0");
  return x;
}

inline std::int64_t count(std::string_view key, std::string_view v, std::int64_t min = 0) {
  const auto x = parse_number<std::int64_t>(key, v);
  require(x >= min, key, "must be >= " + std::to_string(min));
  return x;
}

inline std::vector<double> nonneg_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  for (auto f : csv::split(v)) out.push_back(nonneg(key, trim(f)));
  return out;
}

template <class E, class Names>
E parse_enum(std::string_view key, std::string_view v, const Names& names) {
  for (const auto& [e, name] : names) {
    if (v == name) return e;
  }
  throw ConfigError("invalid value for `" + std::string(key) + "`: '" + std::string(v) + "'");
}

using Setter = std::function<void(ScenarioConfig&, std::string_view key, std::string_view value)>;

inline const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> m;
    auto real = [&m](const char* name, auto member, auto check) {
      m[name] = [member, check](ScenarioConfig& c, std::string_view k, std::string_view v) {
        member(c) = check(k, v);
      };
    };
    auto integer = [&m](const char* name, auto member, std::int64_t min) {
      m[name] = [member, min](ScenarioConfig& c, std::string_view k, std::string_view v) {
        member(c) = count(k, v, min);
      };
    };
    using C = ScenarioConfig;
    m["scenario"] = [](C& c, std::string_view k, std::string_view v) {
      require(!v.empty(), k, "must not be empty");
      c.scenario = std::string(v);
    };
    m["kind"] = [](C& c, std::string_view k, std::string_view v) {
      static const std::pair<ScenarioKind, std::string_view> names[] = {
          {ScenarioKind::trajectory, "trajectory"}, {ScenarioKind::scatter, "scatter"},
          {ScenarioKind::p_sweep, "p_sweep"},       {ScenarioKind::ensemble, "ensemble"},
          {ScenarioKind::kappa_sweep, "kappa_sweep"}, {ScenarioKind::revival, "revival"},
          {ScenarioKind::oracle, "oracle"}};
      c.kind = parse_enum<ScenarioKind>(k, v, names);
    };
    m["pump_mode"] = [](C& c, std::string_view k, std::string_view v) {
      try {
        c.pump_mode = parse_pump_mode(v);
      } catch (const std::invalid_argument&) {
        throw ConfigError("invalid value for `" + std::string(k) + "`: '" + std::string(v) + "'");
      }
    };
    m["gain_model"] = [](C& c, std::string_view k, std::string_view v) {
      static const std::pair<GainModel, std::string_view> names[] = {{GainModel::stimulated, "stimulated"},
                                                                     {GainModel::constant, "constant"}};
      c.rates.gain_model = parse_enum<GainModel>(k, v, names);
    };
    m["detection_measure"] = [](C& c, std::string_view k, std::string_view v) {
      static const std::pair<DetectionMeasure, std::string_view> names[] = {
          {DetectionMeasure::normalized, "normalized"}, {DetectionMeasure::bare, "bare"}};
      c.rates.detection_measure = parse_enum<DetectionMeasure>(k, v, names);
    };
    m["statistic"] = [](C& c, std::string_view k, std::string_view v) {
      static const std::pair<SweepStatistic, std::string_view> names[] = {
          {SweepStatistic::final_time, "final_time"}, {SweepStatistic::time_average, "time_average"}};
      c.statistic = parse_enum<SweepStatistic>(k, v, names);
    };
    m["output"] = [](C& c, std::string_view k, std::string_view v) {
      require(!v.empty(), k, "must not be empty");
      c.output = std::string(v);
    };
    m["seed"] = [](C& c, std::string_view k, std::string_view v) { c.seed = parse_number<std::uint64_t>(k, v); };
    m["kappa_values"] = [](C& c, std::string_view k, std::string_view v) { c.kappa_values = nonneg_list(k, v); };
    m["p_values"] = [](C& c, std::string_view k, std::string_view v) {
      c.p_values = nonneg_list(k, v);
      for (double p : c.p_values) require(p > 0.0, k, "entries must be > 0");
    };

    integer("n1", [](C& c) -> auto& { return c.n1; }, 0);
    integer("n2", [](C& c) -> auto& { return c.n2; }, 0);
    integer("initial_detections", [](C& c) -> auto& { return c.initial_detections; }, 0);
    integer("n_traj", [](C& c) -> auto& { return c.n_traj; }, 1);
    integer("threads", [](C& c) -> auto& { return c.threads; }, 0);
    integer("scatter_cap", [](C& c) -> auto& { return c.scatter_cap; }, 1);
    integer("oracle_nmax", [](C& c) -> auto& { return c.oracle_nmax; }, 1);
    integer("oracle_points", [](C& c) -> auto& { return c.oracle_points; }, 1);

    real("gamma", [](C& c) -> auto& { return c.rates.gamma; }, nonneg);
    real("kappa", [](C& c) -> auto& { return c.rates.kappa; }, nonneg);
    real("nu1", [](C& c) -> auto& { return c.rates.nu1; }, nonneg);
    real("nu2", [](C& c) -> auto& { return c.rates.nu2; }, nonneg);
    real("chi1_in", [](C& c) -> auto& { return c.rates.chi1_in; }, nonneg);
    real("chi1_out", [](C& c) -> auto& { return c.rates.chi1_out; }, nonneg);
    real("chi2_in", [](C& c) -> auto& { return c.rates.chi2_in; }, nonneg);
    real("chi2_out", [](C& c) -> auto& { return c.rates.chi2_out; }, nonneg);
    real("n_bath1", [](C& c) -> auto& { return c.rates.n_bath1; }, nonneg);
    real("n_bath2", [](C& c) -> auto& { return c.rates.n_bath2; }, nonneg);
    real("target1", [](C& c) -> auto& { return c.target1; }, nonneg);
    real("target2", [](C& c) -> auto& { return c.target2; }, nonneg);
    real("horizon", [](C& c) -> auto& { return c.horizon; }, positive);
    real("grid_dt", [](C& c) -> auto& { return c.grid_dt; }, positive);
    real("burn_in", [](C& c) -> auto& { return c.burn_in; }, nonneg);
    real("total_target", [](C& c) -> auto& { return c.total_target; }, positive);
    real("truncation", [](C& c) -> auto& { return c.truncation; }, [](std::string_view k, std::string_view v) {
      const double x = nonneg(k, v);
      require(x < 1.0, k, "must be < 1");
      return x;
    });
    return m;
  }();
  return table;
}

}  // namespace detail

/// Applies `key = value` lines from `text` on top of `base`. Blank lines and
/// text after '#' are ignored. Errors carry the 1-based line number.
inline ScenarioConfig parse_config(std::string_view text, ScenarioConfig base) {
  const auto& table = detail::setters();
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected `key = value`");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(where + "unknown key `" + std::string(key) + "`");
    try {
      it->second(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return base;
}

inline ScenarioConfig parse_config(std::string_view text) { return parse_config(text, ScenarioConfig{}); }

/// Serializes every key so that parse_config(dump_config(c)) == c.
inline std::string dump_config(const ScenarioConfig& c) {
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + csv::format(v[i]);
    return s;
  };
  const auto& r = c.rates;
  std::ostringstream os;
  os << "scenario = " << c.scenario << '\n'
     << "kind = " << to_string(c.kind) << '\n'
     << "n1 = " << c.n1 << '\n'
     << "n2 = " << c.n2 << '\n'
     << "initial_detections = " << c.initial_detections << '\n'
     << "gamma = " << csv::format(r.gamma) << '\n'
     << "kappa = " << csv::format(r.kappa) << '\n'
     << "nu1 = " << csv::format(r.nu1) << '\n'
     << "nu2 = " << csv::format(r.nu2) << '\n'
     << "chi1_in = " << csv::format(r.chi1_in) << '\n'
     << "chi1_out = " << csv::format(r.chi1_out) << '\n'
     << "chi2_in = " << csv::format(r.chi2_in) << '\n'
     << "chi2_out = " << csv::format(r.chi2_out) << '\n'
     << "n_bath1 = " << csv::format(r.n_bath1) << '\n'
     << "n_bath2 = " << csv::format(r.n_bath2) << '\n'
     << "gain_model = " << to_string(r.gain_model) << '\n'
     << "detection_measure = " << to_string(r.detection_measure) << '\n'
     << "pump_mode = " << to_string(c.pump_mode) << '\n'
     << "target1 = " << csv::format(c.target1) << '\n'
     << "target2 = " << csv::format(c.target2) << '\n'
     << "horizon = " << csv::format(c.horizon) << '\n'
     << "grid_dt = " << csv::format(c.grid_dt) << '\n'
     << "burn_in = " << csv::format(c.burn_in) << '\n'
     << "truncation = " << csv::format(c.truncation) << '\n'
     << "n_traj = " << c.n_traj << '\n'
     << "seed = " << c.seed << '\n'
     << "threads = " << c.threads << '\n'
     << "output = " << c.output << '\n'
     << "kappa_values = " << list(c.kappa_values) << '\n'
     << "p_values = " << list(c.p_values) << '\n'
     << "total_target = " << csv::format(c.total_target) << '\n'
     << "statistic = " << to_string(c.statistic) << '\n'
     << "scatter_cap = " << c.scatter_cap << '\n'
     << "oracle_nmax = " << c.oracle_nmax << '\n'
     << "oracle_points = " << c.oracle_points << '\n';
  return os.str();
}

}  // namespace twintrap
