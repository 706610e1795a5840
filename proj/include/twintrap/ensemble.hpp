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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "twintrap/dynamics.hpp"
#include "twintrap/observables.hpp"
#include "twintrap/pumping.hpp"
#include "twintrap/rng.hpp"

namespace twintrap {

/// t_j = j * dt for j = 0 ... floor(horizon / dt).
inline std::vector<double> uniform_grid(double horizon, double dt) {
  if (!(horizon > 0.0) || !(dt > 0.0)) throw std::invalid_argument("uniform_grid: horizon and dt must be > 0");
  const auto n = static_cast<std::size_t>(std::floor(horizon / dt + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) g[j] = static_cast<double>(j) * dt;
  return g;
}

struct TrajectoryRecord {
  std::vector<JumpEvent> events;
  std::vector<double> grid;
  std::vector<StateObservables> samples;  // one per grid time
  std::uint64_t seed = 0;
  bool halted_early = false;  // total jump rate reached zero before the horizon
  TwinTrapState final_state;
};

struct TrajectoryOptions {
  double truncation = kDefaultTruncation;
  bool keep_events = true;
};

/// Runs one trajectory to `horizon` drawing from `rng`. Grid samples hold the
/// observables of the state propagated to each grid time since the last jump.
inline TrajectoryRecord run_trajectory(const TwinTrapState& initial, const RateConfig& base_rates,
                                       const PumpPlan& plan, double horizon, double grid_dt, RngStream& rng,
                                       const TrajectoryOptions& opt = {}) {
  const RateConfig rates = plan.apply(base_rates);
  rates.validate();
  TrajectoryRecord rec;
  rec.grid = uniform_grid(horizon, grid_dt);
  rec.samples.reserve(rec.grid.size());
  const auto injections = regular_injection_times(plan, horizon);
  std::size_t next_inj = 0;
  std::size_t j = 0;
  constexpr double inf = std::numeric_limits<double>::infinity();

  TwinTrapState state = truncate(initial, opt.truncation);
  state.normalize();
  double t = 0.0;
  while (true) {
    const double wait = sample_waiting_time(state, rates, rng.uniform_open_closed());
    const double t_jump = t + wait;
    const double t_inj = next_inj < injections.size() ? injections[next_inj].t : inf;
    const double t_next = std::min(t_jump, t_inj);
    while (j < rec.grid.size() && rec.grid[j] < t_next) {
      rec.samples.push_back(observe(propagate(state, rates, rec.grid[j] - t)));
      ++j;
    }
    if (t_next == inf) {
      rec.halted_early = true;
      break;
    }
    if (t_next > horizon) break;
    if (t_inj <= t_jump) {
      const auto trap = injections[next_inj].trap;
      auto decayed = propagate(state, rates, t_inj - t);
      if (opt.keep_events) rec.events.push_back({t_inj, Inject{trap}, observe(decayed)});
      state = truncate(apply_creation(decayed, trap).state, opt.truncation);
      t = t_inj;
      ++next_inj;
      continue;
    }
    auto step = jump_at(propagate(state, rates, wait), rates, t_jump, rng, opt.truncation);
    if (opt.keep_events) rec.events.push_back(std::move(*step.event));
    state = std::move(step.state);
    t = t_jump;
  }
  rec.final_state = std::move(state);
  return rec;
}

inline TrajectoryRecord run_trajectory(const TwinTrapState& initial, const RateConfig& rates, const PumpPlan& plan,
                                       double horizon, double grid_dt, std::uint64_t seed,
                                       const TrajectoryOptions& opt = {}) {
  RngStream rng(seed);
  auto rec = run_trajectory(initial, rates, plan, horizon, grid_dt, rng, opt);
  rec.seed = seed;
  return rec;
}

struct SeriesStat {
  std::vector<double> mean;
  std::vector<double> sem;  // sample standard deviation / sqrt(n_traj)
};

struct ScalarStat {
  double mean = 0.0;
  double stddev = 0.0;
  double sem = 0.0;
};

struct EnsembleStats {
  std::vector<double> grid;
  std::size_t n_traj = 0;
  SeriesStat beta, n1, n2, n1_sq, n2_sq, sigma_n, sigma_phi, f, coherence_re, coherence_im;
  /// sqrt(mean over trajectories of (sigma_n sigma_phi)^2) per grid time.
  std::vector<double> uncertainty_product_rms;
  /// Per-trajectory time averages over grid times >= burn_in, then ensemble statistics.
  ScalarStat time_averaged_beta, time_averaged_sigma_n, time_averaged_sigma_phi;
  double time_averaged_product_rms = 0.0;
};

struct EnsembleConfig {
  TwinTrapState initial;
  RateConfig rates;
  PumpPlan plan;
  double horizon = 1.0;
  double grid_dt = 0.01;
  double burn_in = 0.0;
  double truncation = kDefaultTruncation;
  unsigned threads = 1;  // 0 = hardware concurrency
};

namespace detail {

struct Welford {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double stddev() const { return n > 1 ? std::sqrt(std::max(0.0, m2 / static_cast<double>(n - 1))) : 0.0; }
  double sem() const { return n > 0 ? stddev() / std::sqrt(static_cast<double>(n)) : 0.0; }
  ScalarStat scalar() const { return {mean, stddev(), sem()}; }
};

class EnsembleAccumulator {
 public:
  EnsembleAccumulator(std::vector<double> grid, double burn_in)
      : grid_(std::move(grid)), burn_in_(burn_in), series_(kSeries, std::vector<Welford>(grid_.size())) {}

  void add(const TrajectoryRecord& rec) {
    if (rec.samples.size() != grid_.size()) throw std::logic_error("EnsembleAccumulator: grid mismatch");
    Welford tb, tn, tp;
    double prod_sq = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      const auto& o = rec.samples[j];
      const double prod = o.sigma_n * o.sigma_phi;
      const double vals[kSeries] = {o.beta,      o.n1_mean, o.n2_mean, o.n1_sq(),          o.n2_sq(),
                                    o.sigma_n,   o.sigma_phi, o.f,     o.coherence.real(), o.coherence.imag(),
                                    prod * prod};
      for (std::size_t s = 0; s < kSeries; ++s) series_[s][j].add(vals[s]);
      if (grid_[j] >= burn_in_) {
        tb.add(o.beta);
        tn.add(o.sigma_n);
        tp.add(o.sigma_phi);
        prod_sq += prod * prod;
        ++count;
      }
    }
    if (count > 0) {
      avg_beta_.add(tb.mean);
      avg_sigma_n_.add(tn.mean);
      avg_sigma_phi_.add(tp.mean);
      avg_prod_sq_.add(prod_sq / static_cast<double>(count));
    }
    ++n_traj_;
  }

  EnsembleStats finish() const {
    EnsembleStats st;
    st.grid = grid_;
    st.n_traj = n_traj_;
    SeriesStat* targets[kSeries - 1] = {&st.beta,    &st.n1,        &st.n2,       &st.n1_sq,        &st.n2_sq,
                                        &st.sigma_n, &st.sigma_phi, &st.f,        &st.coherence_re, &st.coherence_im};
    for (std::size_t s = 0; s + 1 < kSeries; ++s) {
      targets[s]->mean.resize(grid_.size());
      targets[s]->sem.resize(grid_.size());
      for (std::size_t j = 0; j < grid_.size(); ++j) {
        targets[s]->mean[j] = series_[s][j].mean;
        targets[s]->sem[j] = series_[s][j].sem();
      }
    }
    st.uncertainty_product_rms.resize(grid_.size());
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      st.uncertainty_product_rms[j] = std::sqrt(series_[kSeries - 1][j].mean);
    }
    st.time_averaged_beta = avg_beta_.scalar();
    st.time_averaged_sigma_n = avg_sigma_n_.scalar();
    st.time_averaged_sigma_phi = avg_sigma_phi_.scalar();
    st.time_averaged_product_rms = std::sqrt(avg_prod_sq_.mean);
    return st;
  }

 private:
  static constexpr std::size_t kSeries = 11;
  std::vector<double> grid_;
  double burn_in_;
  std::vector<std::vector<Welford>> series_;
  Welford avg_beta_, avg_sigma_n_, avg_sigma_phi_, avg_prod_sq_;
  std::size_t n_traj_ = 0;
};

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace detail

using RecordVisitor = std::function<void(std::size_t index, const TrajectoryRecord&)>;

/// Runs n_traj seeded trajectories and aggregates them. Trajectory i uses
/// trajectory_seed(master_seed, i). Records are reduced (and passed to
/// `visit`) in index order, so results do not depend on the thread count.
inline EnsembleStats run_ensemble(const EnsembleConfig& cfg, std::size_t n_traj, std::uint64_t master_seed,
                                  const RecordVisitor& visit = {}) {
  if (n_traj < 2) throw std::invalid_argument("run_ensemble: n_traj must be >= 2");
  const unsigned threads = detail::resolve_threads(cfg.threads);
  detail::EnsembleAccumulator acc(uniform_grid(cfg.horizon, cfg.grid_dt), cfg.burn_in);
  const TrajectoryOptions opt{cfg.truncation, false};
  auto run_one = [&](std::size_t i) {
    return run_trajectory(cfg.initial, cfg.rates, cfg.plan, cfg.horizon, cfg.grid_dt,
                          trajectory_seed(master_seed, i), opt);
  };

  const std::size_t batch = std::max<std::size_t>(4 * threads, 16);
  std::vector<std::optional<TrajectoryRecord>> slot(batch);
  for (std::size_t start = 0; start < n_traj; start += batch) {
    const std::size_t count = std::min(batch, n_traj - start);
    if (threads <= 1) {
      for (std::size_t i = 0; i < count; ++i) slot[i] = run_one(start + i);
    } else {
      std::atomic<std::size_t> next{0};
      std::exception_ptr failure;
      std::atomic<bool> failed{false};
      {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < std::min<std::size_t>(threads, count); ++w) {
          pool.emplace_back([&] {
            for (std::size_t i = next++; i < count && !failed; i = next++) {
              try {
                slot[i] = run_one(start + i);
              } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
              }
            }
          });
        }
      }
      if (failure) std::rethrow_exception(failure);
    }
    for (std::size_t i = 0; i < count; ++i) {
      acc.add(*slot[i]);
      if (visit) visit(start + i, *slot[i]);
      slot[i].reset();
    }
  }
  return acc.finish();
}

/// (f, beta) pairs from grid samples at t >= burn_in, in trajectory order.
inline void append_scatter(const TrajectoryRecord& rec, double burn_in, std::vector<std::pair<double, double>>& out) {
  for (std::size_t j = 0; j < rec.grid.size() && j < rec.samples.size(); ++j) {
    if (rec.grid[j] >= burn_in) out.emplace_back(rec.samples[j].f, rec.samples[j].beta);
  }
}

/// Evenly spaced subsample of exactly `cap` points (all points if fewer).
inline std::vector<std::pair<double, double>> subsample(std::span<const std::pair<double, double>> pts,
                                                        std::size_t cap) {
  if (pts.size() <= cap) return {pts.begin(), pts.end()};
  std::vector<std::pair<double, double>> out;
  out.reserve(cap);
  for (std::size_t i = 0; i < cap; ++i) out.push_back(pts[i * pts.size() / cap]);
  return out;
}

inline std::vector<std::pair<double, double>> scatter_points(std::span<const TrajectoryRecord> records,
                                                             double burn_in, std::size_t cap) {
  std::vector<std::pair<double, double>> all;
  for (const auto& r : records) append_scatter(r, burn_in, all);
  return subsample(all, cap);
}

}  // namespace twintrap
