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

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "twintrap/analytics.hpp"
#include "twintrap/config.hpp"
#include "twintrap/csv.hpp"
#include "twintrap/ensemble.hpp"
#include "twintrap/oracle.hpp"

namespace twintrap {

/// Worker count: the config value if set, else TWINTRAP_THREADS, else 0
/// (hardware concurrency).
inline unsigned scenario_threads(const ScenarioConfig& cfg) {
  if (cfg.threads > 0) return static_cast<unsigned>(cfg.threads);
  if (const char* env = std::getenv("TWINTRAP_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("TWINTRAP_THREADS must be a non-negative integer, got '") + env + "'");
  }
  return 0;
}

/// Initial number state, followed by `initial_detections` instantaneous
/// detections drawn from `rng`.
inline TwinTrapState scenario_initial_state(const ScenarioConfig& cfg, RngStream& rng) {
  auto s = TwinTrapState::number_state(cfg.n1, cfg.n2);
  if (cfg.initial_detections > 0) s = prepare_by_detections(s, cfg.initial_detections, rng, cfg.truncation);
  return s;
}

/// Pump plan balanced at the configured targets, or at the mean occupancies
/// of `start` where a target is 0.
inline PumpPlan scenario_plan(const ScenarioConfig& cfg, const TwinTrapState& start) {
  const auto obs = observe(start);
  const double t1 = cfg.target1 > 0.0 ? cfg.target1 : obs.n1_mean;
  const double t2 = cfg.target2 > 0.0 ? cfg.target2 : obs.n2_mean;
  return make_pump_plan(cfg.pump_mode, t1, t2, cfg.rates);
}

/// Seed used for the preparation stream shared by every ensemble member.
inline std::uint64_t preparation_seed(std::uint64_t master_seed) { return trajectory_seed(master_seed, ~0ULL); }

inline EnsembleConfig scenario_ensemble(const ScenarioConfig& cfg) {
  RngStream prep(preparation_seed(cfg.seed));
  EnsembleConfig e;
  e.initial = scenario_initial_state(cfg, prep);
  e.rates = cfg.rates;
  e.plan = scenario_plan(cfg, e.initial);
  e.horizon = cfg.horizon;
  e.grid_dt = cfg.grid_dt;
  e.burn_in = cfg.burn_in;
  e.truncation = cfg.truncation;
  e.threads = scenario_threads(cfg);
  return e;
}

struct RevivalResult {
  TrajectoryRecord record;
  TwinTrapState prepared;
  CollapseFit fit;
};

/// Preparation by detections followed by one trajectory from the same stream.
inline RevivalResult run_revival(const ScenarioConfig& cfg) {
  RngStream rng(trajectory_seed(cfg.seed, 0));
  RevivalResult out;
  out.prepared = scenario_initial_state(cfg, rng);
  const auto plan = scenario_plan(cfg, out.prepared);
  out.record = run_trajectory(out.prepared, cfg.rates, plan, cfg.horizon, cfg.grid_dt, rng, {cfg.truncation, false});
  std::vector<double> beta(out.record.samples.size());
  for (std::size_t j = 0; j < beta.size(); ++j) beta[j] = out.record.samples[j].beta;
  out.fit = fit_collapse_revival(out.record.grid, beta, cfg.rates.kappa);
  return out;
}

struct OracleRow {
  double t;
  const char* observable;
  double mcwf_mean;
  double mcwf_stderr;
  double oracle_value;
};

/// Trajectory ensemble and dense integration of the same master equation,
/// compared at `oracle_points` evenly spaced times in (0, horizon].
inline std::vector<OracleRow> run_oracle_check(const ScenarioConfig& cfg) {
  if (cfg.n_traj < 2) throw ConfigError("`n_traj` must be >= 2 for an ensemble");
  const auto ens = scenario_ensemble(cfg);
  const auto stats = run_ensemble(ens, static_cast<std::size_t>(cfg.n_traj), cfg.seed);

  std::vector<double> times;
  std::vector<std::size_t> index;
  for (std::int64_t j = 1; j <= cfg.oracle_points; ++j) {
    const double want = cfg.horizon * static_cast<double>(j) / static_cast<double>(cfg.oracle_points);
    const auto i = static_cast<std::size_t>(std::llround(want / cfg.grid_dt));
    if (i >= stats.grid.size()) throw std::logic_error("oracle time beyond the sample grid");
    index.push_back(i);
    times.push_back(stats.grid[i]);
  }
  const int nmax = static_cast<int>(cfg.oracle_nmax);
  const auto rho = oracle::integrate(oracle::DensityMatrix::pure(ens.initial, nmax), ens.plan.apply(ens.rates), times);

  std::vector<OracleRow> rows;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const std::size_t i = index[j];
    auto exp = [&](oracle::Observable o) { return oracle::expectation(rho[j], o).real(); };
    rows.push_back({times[j], "n1", stats.n1.mean[i], stats.n1.sem[i], exp(oracle::Observable::n1)});
    rows.push_back({times[j], "n2", stats.n2.mean[i], stats.n2.sem[i], exp(oracle::Observable::n2)});
    rows.push_back({times[j], "n1_sq", stats.n1_sq.mean[i], stats.n1_sq.sem[i], exp(oracle::Observable::n1_sq)});
    rows.push_back({times[j], "n2_sq", stats.n2_sq.mean[i], stats.n2_sq.sem[i], exp(oracle::Observable::n2_sq)});
  }
  return rows;
}

namespace detail {

/// Removes files it tracks unless released; keeps outputs all-or-nothing.
class OutputGuard {
 public:
  ~OutputGuard() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : paths_) std::filesystem::remove(p, ec);
  }
  std::string track(std::string p) {
    paths_.push_back(p);
    return p;
  }
  std::vector<std::string> commit() {
    committed_ = true;
    return paths_;
  }

 private:
  std::vector<std::string> paths_;
  bool committed_ = false;
};

inline std::size_t traj_count(const ScenarioConfig& cfg) {
  if (cfg.n_traj < 2) throw ConfigError("`n_traj` must be >= 2 for an ensemble");
  return static_cast<std::size_t>(cfg.n_traj);
}

}  // namespace detail

/// Runs a scenario and writes its table(s) under cfg.output. Returns the
/// written paths. On error every file this call created is removed.
inline std::vector<std::string> run_scenario(const ScenarioConfig& cfg, std::ostream* log = nullptr) {
  cfg.rates.validate();
  std::filesystem::create_directories(cfg.output);
  const auto base = (std::filesystem::path(cfg.output) / cfg.scenario).string();
  detail::OutputGuard guard;
  csv::Table table;

  switch (cfg.kind) {
    case ScenarioKind::trajectory: {
      RngStream rng(trajectory_seed(cfg.seed, 0));
      const auto init = scenario_initial_state(cfg, rng);
      const auto rec = run_trajectory(init, cfg.rates, scenario_plan(cfg, init), cfg.horizon, cfg.grid_dt, rng,
                                      {cfg.truncation, false});
      table.header = {"t", "beta", "n1", "n2"};
      for (std::size_t j = 0; j < rec.samples.size(); ++j) {
        const auto& o = rec.samples[j];
        table.rows.push_back({rec.grid[j], o.beta, o.n1_mean, o.n2_mean});
      }
      break;
    }
    case ScenarioKind::scatter: {
      std::vector<std::pair<double, double>> all;
      run_ensemble(scenario_ensemble(cfg), detail::traj_count(cfg), cfg.seed,
                   [&](std::size_t, const TrajectoryRecord& r) { append_scatter(r, cfg.burn_in, all); });
      const auto pts = subsample(all, static_cast<std::size_t>(cfg.scatter_cap));
      table.header = {"f", "beta", "reference"};
      for (const auto& [f, b] : pts) table.rows.push_back({f, b, visibility_from_occupancy(std::clamp(f, -1.0, 1.0))});
      break;
    }
    case ScenarioKind::p_sweep: {
      if (cfg.p_values.empty()) throw ConfigError("`p_values` must not be empty");
      table.header = {"p", "beta_mean", "stderr", "analytic", "stddev", "asymptotic"};
      for (double p : cfg.p_values) {
        ScenarioConfig c = cfg;
        c.target1 = cfg.total_target * p / (1.0 + p);
        c.target2 = cfg.total_target / (1.0 + p);
        c.n1 = std::llround(c.target1);
        c.n2 = std::llround(c.target2);
        const auto st = run_ensemble(scenario_ensemble(c), detail::traj_count(c), c.seed);
        table.rows.push_back({p, st.time_averaged_beta.mean, st.time_averaged_beta.sem,
                              mean_visibility_exact(c.target1, c.target2), st.time_averaged_beta.stddev,
                              mean_visibility_asymptotic(p)});
        if (log) *log << "p = " << p << ": beta_mean = " << st.time_averaged_beta.mean << '\n';
      }
      break;
    }
    case ScenarioKind::ensemble: {
      const auto st = run_ensemble(scenario_ensemble(cfg), detail::traj_count(cfg), cfg.seed);
      table.header = {"t", "beta_mean", "stderr"};
      for (std::size_t j = 0; j < st.grid.size(); ++j) table.rows.push_back({st.grid[j], st.beta.mean[j], st.beta.sem[j]});
      if (log) {
        *log << "time-averaged beta after t = " << cfg.burn_in << ": " << st.time_averaged_beta.mean << " (std "
             << st.time_averaged_beta.stddev << ")\n";
      }
      break;
    }
    case ScenarioKind::kappa_sweep: {
      if (cfg.kappa_values.empty()) throw ConfigError("`kappa_values` must not be empty");
      table.header = {"kappa", "beta_mean", "sigma_n", "sigma_phi", "product_rms", "beta_stderr", "sigma_n_stderr"};
      for (double k : cfg.kappa_values) {
        ScenarioConfig c = cfg;
        c.rates.kappa = k;
        const auto st = run_ensemble(scenario_ensemble(c), detail::traj_count(c), c.seed);
        if (cfg.statistic == SweepStatistic::final_time) {
          const std::size_t j = st.grid.size() - 1;
          table.rows.push_back({k, st.beta.mean[j], st.sigma_n.mean[j], st.sigma_phi.mean[j],
                                st.uncertainty_product_rms[j], st.beta.sem[j], st.sigma_n.sem[j]});
        } else {
          table.rows.push_back({k, st.time_averaged_beta.mean, st.time_averaged_sigma_n.mean,
                                st.time_averaged_sigma_phi.mean, st.time_averaged_product_rms,
                                st.time_averaged_beta.sem, st.time_averaged_sigma_n.sem});
        }
        if (log) *log << "kappa = " << k << " done\n";
      }
      break;
    }
    case ScenarioKind::revival: {
      const auto res = run_revival(cfg);
      table.header = {"t", "beta", "n1", "n2", "sigma_n"};
      for (std::size_t j = 0; j < res.record.samples.size(); ++j) {
        const auto& o = res.record.samples[j];
        table.rows.push_back({res.record.grid[j], o.beta, o.n1_mean, o.n2_mean, o.sigma_n});
      }
      // Directly measured number width at each fitted peak, for comparison
      // with the width inferred from the collapse shape.
      std::vector<double> sigma_n_direct;
      std::vector<double> sigma_n_from_fit;
      for (std::size_t i = 0; i < res.fit.peak_times.size(); ++i) {
        const auto j = static_cast<std::size_t>(std::llround(res.fit.peak_times[i] / cfg.grid_dt));
        sigma_n_direct.push_back(res.record.samples[std::min(j, res.record.samples.size() - 1)].sigma_n);
        sigma_n_from_fit.push_back(2.0 * res.fit.sigma_A_estimates[i]);
      }
      nlohmann::json js = {
          {"kappa", cfg.rates.kappa},
          {"expected_period", std::numbers::pi / cfg.rates.kappa},
          {"period", res.fit.period},
          {"peak_times", res.fit.peak_times},
          {"peak_heights", res.fit.peak_heights},
          {"widths", res.fit.widths},
          {"sigma_A_estimates", res.fit.sigma_A_estimates},
          {"sigma_n_from_fit", sigma_n_from_fit},
          {"sigma_n_direct", sigma_n_direct},
          {"prepared_sigma_A", a_coefficients(res.prepared).sigma_A},
          {"prepared_sigma_n", observe(res.prepared).sigma_n},
      };
      const auto path = guard.track(base + ".fit.json");
      std::ofstream os(path);
      os << js.dump(2) << '\n';
      if (!os) throw std::runtime_error("write failed for '" + path + "'");
      break;
    }
    case ScenarioKind::oracle: {
      table.header = {"t", "observable", "mcwf_mean", "mcwf_stderr", "oracle_value"};
      for (const auto& r : run_oracle_check(cfg)) {
        table.rows.push_back({r.t, std::string(r.observable), r.mcwf_mean, r.mcwf_stderr, r.oracle_value});
      }
      break;
    }
  }
  csv::write_file(guard.track(base + ".csv"), table);
  return guard.commit();
}

}  // namespace twintrap
