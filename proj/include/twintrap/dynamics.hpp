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
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "twintrap/observables.hpp"
#include "twintrap/rng.hpp"
#include "twintrap/twin_state.hpp"

namespace twintrap {

/// Occupancy dependence of the pump-in jump rate.
///   stimulated: rate chi_in N (n + 1), jump operator a^dagger.
///   constant:   rate chi_in N, jump operator sum_n |n+1><n|.
enum class GainModel { stimulated, constant };

/// Measure of the phi integral over the detection dissipator.
///   normalized: dphi / 2pi, total detection rate gamma <n1 + n2>.
///   bare:       dphi, total detection rate 2 pi gamma <n1 + n2>.
enum class DetectionMeasure { normalized, bare };

/// Physical rates in units of the detection rate.
struct RateConfig {
  double gamma = 1.0;
  double kappa = 0.0;
  double nu1 = 0.0;
  double nu2 = 0.0;
  double chi1_in = 0.0;
  double chi1_out = 0.0;
  double chi2_in = 0.0;
  double chi2_out = 0.0;
  double n_bath1 = 0.0;
  double n_bath2 = 0.0;
  GainModel gain_model = GainModel::stimulated;
  DetectionMeasure detection_measure = DetectionMeasure::normalized;

  void validate() const {
    const std::pair<const char*, double> fields[] = {
        {"gamma", gamma},       {"kappa", kappa},       {"nu1", nu1},         {"nu2", nu2},
        {"chi1_in", chi1_in},   {"chi1_out", chi1_out}, {"chi2_in", chi2_in}, {"chi2_out", chi2_out},
        {"n_bath1", n_bath1},   {"n_bath2", n_bath2}};
    for (const auto& [name, v] : fields) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string("RateConfig: ") + name + " must be finite and >= 0");
      }
    }
  }

  /// Coefficient of (n1 + n2) in the detection rate.
  double detection() const {
    return detection_measure == DetectionMeasure::bare ? 2.0 * std::numbers::pi * gamma : gamma;
  }
  /// Coefficient of n_i for the combined output-coupler and pump-out loss.
  double loss(Trap t) const {
    return t == Trap::one ? nu1 + chi1_out * (n_bath1 + 1.0) : nu2 + chi2_out * (n_bath2 + 1.0);
  }
  /// chi_in N_i.
  double gain(Trap t) const { return t == Trap::one ? chi1_in * n_bath1 : chi2_in * n_bath2; }

  friend bool operator==(const RateConfig&, const RateConfig&) = default;
};

struct Detect {
  double phi = 0.0;
  friend bool operator==(const Detect&, const Detect&) = default;
};
struct Loss {
  Trap trap = Trap::one;
  friend bool operator==(const Loss&, const Loss&) = default;
};
struct Gain {
  Trap trap = Trap::one;
  friend bool operator==(const Gain&, const Gain&) = default;
};
/// Scheduled creation event of the regular pumping mode.
struct Inject {
  Trap trap = Trap::one;
  friend bool operator==(const Inject&, const Inject&) = default;
};

using JumpChannel = std::variant<Detect, Loss, Gain, Inject>;

struct JumpEvent {
  double t = 0.0;
  JumpChannel channel;
  StateObservables before;
  friend bool operator==(const JumpEvent&, const JumpEvent&) = default;
};

/// Gamma_k, the norm-decay rate of component k under the effective Hamiltonian.
inline double per_component_decay_rate(const TwinTrapState& s, const RateConfig& r, std::int64_t k) {
  const auto n1 = static_cast<double>(s.n1_at(k));
  const auto n2 = static_cast<double>(s.n2_at(k));
  double g = r.detection() * static_cast<double>(s.total_number()) + r.loss(Trap::one) * n1 +
             r.loss(Trap::two) * n2;
  if (r.gain_model == GainModel::stimulated) {
    g += r.gain(Trap::one) * (n1 + 1.0) + r.gain(Trap::two) * (n2 + 1.0);
  } else {
    g += r.gain(Trap::one) + r.gain(Trap::two);
  }
  return g;
}

inline std::vector<double> decay_rates(const TwinTrapState& s, const RateConfig& r) {
  std::vector<double> g(s.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = per_component_decay_rate(s, r, s.k_min() + static_cast<std::int64_t>(i));
  }
  return g;
}

/// Exact evolution under the (diagonal) effective Hamiltonian for time dt.
/// The result is not renormalized.
inline TwinTrapState propagate(TwinTrapState s, const RateConfig& r, double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("propagate: dt must be >= 0");
  if (dt == 0.0) return s;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double half_kappa_dt = 0.5 * r.kappa * dt;
  auto c = s.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const std::int64_t k = s.k_min() + static_cast<std::int64_t>(i);
    const auto n1 = static_cast<double>(s.n1_at(k));
    const auto n2 = static_cast<double>(s.n2_at(k));
    const double phase = std::fmod(half_kappa_dt * (n1 * n1 + n2 * n2), two_pi);
    const double decay = std::exp(-0.5 * per_component_decay_rate(s, r, k) * dt);
    c[i] *= std::polar(decay, -phase);
  }
  return s;
}

/// Time t* at which sum_k |c_k|^2 exp(-Gamma_k t*) / ||c||^2 = u, for u in (0, 1].
/// Returns +infinity when the norm never decays to u.
inline double sample_waiting_time(const TwinTrapState& s, const RateConfig& r, double u) {
  if (!(u > 0.0 && u <= 1.0)) throw std::invalid_argument("sample_waiting_time: u must lie in (0, 1]");
  if (u == 1.0) return 0.0;
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto gam = decay_rates(s, r);
  const double norm = s.norm_sq();
  std::vector<double> w(gam.size());
  double floor_w = 0.0;
  double mean_rate = 0.0;
  double min_rate = inf;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::norm(s.coeffs()[i]) / norm;
    if (w[i] == 0.0) continue;
    if (gam[i] == 0.0) floor_w += w[i];
    mean_rate += w[i] * gam[i];
    min_rate = std::min(min_rate, gam[i]);
  }
  if (floor_w >= u || !(mean_rate > 0.0)) return inf;

  const double target = std::log(u);
  auto g = [&](double t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * std::exp(-gam[i] * t);
    return std::log(acc) - target;
  };

  // log-norm is convex and decreasing: its tangent at 0 bounds the root from below.
  double lo = -target / mean_rate;
  double glo = g(lo);
  if (glo <= 0.0) return lo;
  double hi = min_rate > 0.0 ? -target / min_rate : 2.0 * lo;
  double ghi = g(hi);
  while (ghi > 0.0) {
    lo = hi;
    glo = ghi;
    hi *= 2.0;
    ghi = g(hi);
  }
  if (ghi == 0.0) return hi;

  // Bracketed secant (Illinois variant) with a bisection fallback.
  int side = 0;
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    double t = hi - ghi * (hi - lo) / (ghi - glo);
    if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
    const double gt = g(t);
    if (gt == 0.0 || std::abs(gt) < 1e-15) return t;
    if (gt > 0.0) {
      lo = t;
      glo = gt;
      if (side == 1) ghi *= 0.5;
      side = 1;
    } else {
      hi = t;
      ghi = gt;
      if (side == -1) glo *= 0.5;
      side = -1;
    }
  }
  return 0.5 * (lo + hi);
}

/// Jump rates of each channel for the normalized state.
struct ChannelRates {
  double detect = 0.0;
  double loss1 = 0.0;
  double loss2 = 0.0;
  double gain1 = 0.0;
  double gain2 = 0.0;

  double total() const { return detect + loss1 + loss2 + gain1 + gain2; }
};

inline ChannelRates channel_rates(const TwinTrapState& s, const RateConfig& r) {
  const auto c = s.coeffs();
  double norm = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const std::int64_t k = s.k_min() + static_cast<std::int64_t>(i);
    const double p = std::norm(c[i]);
    norm += p;
    m1 += p * static_cast<double>(s.n1_at(k));
    m2 += p * static_cast<double>(s.n2_at(k));
  }
  m1 /= norm;
  m2 /= norm;
  ChannelRates out;
  out.detect = r.detection() * static_cast<double>(s.total_number());
  out.loss1 = r.loss(Trap::one) * m1;
  out.loss2 = r.loss(Trap::two) * m2;
  if (r.gain_model == GainModel::stimulated) {
    out.gain1 = r.gain(Trap::one) * (m1 + 1.0);
    out.gain2 = r.gain(Trap::two) * (m2 + 1.0);
  } else {
    out.gain1 = r.gain(Trap::one);
    out.gain2 = r.gain(Trap::two);
  }
  return out;
}

/// Picks a channel with probability proportional to its rate; u in [0, 1).
/// Detect is returned with phi = 0.
inline JumpChannel select_channel(const TwinTrapState& s, const RateConfig& r, double u) {
  const auto cr = channel_rates(s, r);
  const double total = cr.total();
  if (!(total > 0.0)) throw std::logic_error("select_channel: no channel has a positive rate");
  const std::pair<double, JumpChannel> table[] = {
      {cr.detect, Detect{}},        {cr.loss1, Loss{Trap::one}}, {cr.loss2, Loss{Trap::two}},
      {cr.gain1, Gain{Trap::one}},  {cr.gain2, Gain{Trap::two}}};
  const double x = u * total;
  double cum = 0.0;
  const JumpChannel* last = nullptr;
  for (const auto& [rate, ch] : table) {
    if (!(rate > 0.0)) continue;
    cum += rate;
    last = &ch;
    if (x < cum) return ch;
  }
  return *last;
}

/// Inverse-CDF sample of the density (1 + beta cos(phi + theta)) / 2pi on [0, 2pi).
inline double sample_detection_phase(double beta, double theta, double u) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  beta = std::clamp(beta, 0.0, 1.0);
  if (beta == 0.0) return two_pi * u;
  const double s0 = std::sin(theta);
  const double target = two_pi * u;
  double lo = 0.0;
  double hi = two_pi;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = mid + beta * (std::sin(mid + theta) - s0);
    if (cdf < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double phi = 0.5 * (lo + hi);
  return phi < two_pi ? phi : 0.0;
}

inline double sample_detection_phase(const TwinTrapState& s, double u) {
  const auto fr = conditional_fringe(s);
  return sample_detection_phase(fr.beta, fr.theta, u);
}

inline OpResult apply_channel(const TwinTrapState& s, const JumpChannel& ch, GainModel model) {
  return std::visit(
      [&](const auto& c) -> OpResult {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, Detect>) {
          return apply_detection_operator(s, c.phi);
        } else if constexpr (std::is_same_v<C, Loss>) {
          return apply_annihilation(s, c.trap);
        } else if constexpr (std::is_same_v<C, Gain>) {
          return model == GainModel::stimulated ? apply_creation(s, c.trap) : apply_raising(s, c.trap);
        } else {
          return apply_creation(s, c.trap);
        }
      },
      ch);
}

struct StepResult {
  TwinTrapState state;
  std::optional<JumpEvent> event;  // empty when the total jump rate is zero

  bool halted() const { return !event.has_value(); }
};

/// Applies a stochastic jump to the decayed (unnormalized) state at time t.
/// Draws one uniform for the channel and, for detections, one for the phase.
inline StepResult jump_at(const TwinTrapState& decayed, const RateConfig& r, double t, RngStream& rng,
                          double truncation = kDefaultTruncation) {
  JumpChannel ch = select_channel(decayed, r, rng.uniform());
  if (auto* d = std::get_if<Detect>(&ch)) d->phi = sample_detection_phase(decayed, rng.uniform());
  JumpEvent ev{t, ch, observe(decayed)};
  auto res = apply_channel(decayed, ch, r.gain_model);
  if (!res.ok()) throw std::logic_error("jump_at: selected channel annihilated the state");
  return {truncate(res.state, truncation), std::move(ev)};
}

/// One event-driven trajectory step: exact waiting time, decay, channel,
/// phase, jump, truncation and renormalization.
inline StepResult step_trajectory(const TwinTrapState& s, const RateConfig& r, double t_now, RngStream& rng,
                                  double truncation = kDefaultTruncation) {
  const double dt = sample_waiting_time(s, r, rng.uniform_open_closed());
  if (!std::isfinite(dt)) return {s, std::nullopt};
  return jump_at(propagate(s, r, dt), r, t_now + dt, rng, truncation);
}

/// Applies `count` detections back to back (no elapsed time), each phase
/// drawn from the current conditional fringe. Builds the entangled state
/// that collisional evolution then acts on.
inline TwinTrapState prepare_by_detections(TwinTrapState s, std::int64_t count, RngStream& rng,
                                           double truncation = kDefaultTruncation) {
  if (count < 0) throw std::invalid_argument("prepare_by_detections: count must be >= 0");
  if (count > s.total_number()) throw std::invalid_argument("prepare_by_detections: not enough atoms");
  for (std::int64_t i = 0; i < count; ++i) {
    auto res = apply_detection_operator(s, sample_detection_phase(s, rng.uniform()));
    if (!res.ok()) throw std::logic_error("prepare_by_detections: state annihilated");
    s = truncate(res.state, truncation);
  }
  return s;
}

}  // namespace twintrap
