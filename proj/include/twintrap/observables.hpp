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
#include <complex>
#include <stdexcept>

#include "twintrap/twin_state.hpp"

// All functions here accept unnormalized states and report expectation
// values of the normalized state.

namespace twintrap {

struct StateObservables {
  double n1_mean = 0.0;
  double n2_mean = 0.0;
  double f = 0.0;
  double beta = 0.0;
  double theta = 0.0;
  double sigma_n = 0.0;
  double sigma_phi = 1.0;
  Complex coherence{};  // <a1^dagger a2>

  /// <n_i^2>; both occupancies share the variance of k.
  double n1_sq() const { return n1_mean * n1_mean + 0.25 * sigma_n * sigma_n; }
  double n2_sq() const { return n2_mean * n2_mean + 0.25 * sigma_n * sigma_n; }

  friend bool operator==(const StateObservables&, const StateObservables&) = default;
};

/// <a1^dagger a2> = sum_k c_k^* c_{k+1} sqrt((n1-k)(n2+k+1)).
inline Complex cross_coherence(const TwinTrapState& s) {
  const auto c = s.coeffs();
  Complex acc{};
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    const std::int64_t k = s.k_min() + static_cast<std::int64_t>(i);
    const double w = std::sqrt(static_cast<double>(s.n1_at(k)) * static_cast<double>(s.n2_at(k) + 1));
    acc += std::conj(c[i]) * c[i + 1] * w;
  }
  return acc / s.norm_sq();
}

struct Fringe {
  double beta = 0.0;
  double theta = 0.0;
};

namespace detail {
inline Fringe fringe_from(Complex x, std::int64_t n) {
  const double mag = std::abs(x);
  if (mag == 0.0) return {0.0, 0.0};
  return {2.0 * mag / static_cast<double>(n), -std::arg(x)};
}
}  // namespace detail

/// Visibility and phase of the next-detection density, P(phi) ~ 1 + beta cos(phi + theta).
inline Fringe conditional_fringe(const TwinTrapState& s) {
  if (s.total_number() == 0) throw std::domain_error("conditional_fringe: empty system");
  return detail::fringe_from(cross_coherence(s), s.total_number());
}

struct NumberStats {
  double n1_mean = 0.0;
  double n2_mean = 0.0;
  double sigma_n = 0.0;
  double f = 0.0;
};

inline NumberStats number_stats(const TwinTrapState& s) {
  const auto c = s.coeffs();
  double w = 0.0;
  double mk = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double p = std::norm(c[i]);
    w += p;
    mk += p * static_cast<double>(i);
  }
  mk /= w;
  double vk = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double d = static_cast<double>(i) - mk;
    vk += std::norm(c[i]) * d * d;
  }
  vk /= w;
  const double kbar = static_cast<double>(s.k_min()) + mk;
  NumberStats out;
  out.n1_mean = static_cast<double>(s.base_n1()) - kbar;
  out.n2_mean = static_cast<double>(s.base_n2()) + kbar;
  out.sigma_n = 2.0 * std::sqrt(vk);
  const auto n = static_cast<double>(s.total_number());
  out.f = n > 0.0 ? (out.n1_mean - out.n2_mean) / n : 0.0;
  return out;
}

/// sqrt(1 - |sum_k c_k^* c_{k+1}|^2): bare coefficient overlap, no occupancy weights.
inline double phase_width(const TwinTrapState& s) {
  const auto c = s.coeffs();
  Complex acc{};
  for (std::size_t i = 0; i + 1 < c.size(); ++i) acc += std::conj(c[i]) * c[i + 1];
  const double o = std::abs(acc) / s.norm_sq();
  return std::sqrt(std::max(0.0, 1.0 - o * o));
}

inline StateObservables observe(const TwinTrapState& s) {
  const auto ns = number_stats(s);
  StateObservables o;
  o.n1_mean = ns.n1_mean;
  o.n2_mean = ns.n2_mean;
  o.sigma_n = ns.sigma_n;
  o.f = ns.f;
  o.sigma_phi = phase_width(s);
  o.coherence = cross_coherence(s);
  if (s.total_number() > 0) {
    const auto fr = detail::fringe_from(o.coherence, s.total_number());
    o.beta = fr.beta;
    o.theta = fr.theta;
  }
  return o;
}

}  // namespace twintrap
