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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "twintrap/dynamics.hpp"

namespace twintrap {

/// Pump coefficient that holds <n1 + n2> at the targets when atoms are
/// exchanged with the baths in both directions (chi_in = chi_out).
inline double two_way_rate(double n1_target, double n2_target, double gamma, double nu1, double nu2,
                           double n_bath1, double n_bath2) {
  const double denom = n_bath1 + n_bath2 - (n1_target + n2_target);
  if (!(denom > 0.0)) throw std::domain_error("two_way_rate: bath too small");
  return (gamma * (n1_target + n2_target) + nu1 * n1_target + nu2 * n2_target) / denom;
}

/// Pump coefficient for inward-only pumping (chi_out = 0).
inline double one_way_rate(double n1_target, double n2_target, double gamma, double nu1, double nu2,
                           double n_bath1, double n_bath2) {
  if (!(n_bath1 > 0.0 || n_bath2 > 0.0)) throw std::domain_error("one_way_rate: baths must be > 0");
  const double denom = n_bath1 * (n1_target + 1.0) + n_bath2 * (n2_target + 1.0);
  return (gamma * (n1_target + n2_target) + nu1 * n1_target + nu2 * n2_target) / denom;
}

enum class PumpMode { none, one_way, two_way, regular, manual };

inline std::string_view to_string(PumpMode m) {
  switch (m) {
    case PumpMode::none: return "none";
    case PumpMode::one_way: return "one_way";
    case PumpMode::two_way: return "two_way";
    case PumpMode::regular: return "regular";
    case PumpMode::manual: return "manual";
  }
  return "?";
}

inline PumpMode parse_pump_mode(std::string_view s) {
  for (auto m : {PumpMode::none, PumpMode::one_way, PumpMode::two_way, PumpMode::regular, PumpMode::manual}) {
    if (s == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown pump mode '" + std::string(s) + "'");
}

/// Pumping configuration resolved against the loss channels. Rates are held
/// per trap so unequal targets balance each trap separately; for equal
/// targets and baths they coincide with the joint balance formulas.
struct PumpPlan {
  PumpMode mode = PumpMode::none;
  double chi1 = 0.0;
  double chi2 = 0.0;
  double injection_period1 = 0.0;  // regular mode; 0 means no injections
  double injection_period2 = 0.0;

  /// The RateConfig this plan emits: pump coefficients set per mode.
  RateConfig apply(RateConfig r) const {
    switch (mode) {
      case PumpMode::manual:
        return r;
      case PumpMode::one_way:
        r.chi1_in = chi1;
        r.chi2_in = chi2;
        r.chi1_out = r.chi2_out = 0.0;
        return r;
      case PumpMode::two_way:
        r.chi1_in = r.chi1_out = chi1;
        r.chi2_in = r.chi2_out = chi2;
        return r;
      case PumpMode::regular:
      case PumpMode::none:
        r.chi1_in = r.chi1_out = r.chi2_in = r.chi2_out = 0.0;
        return r;
    }
    return r;
  }
};

/// Resolves a pump plan that balances detection and output-coupler losses
/// at the given target occupancies. Uses gamma, nu_i and n_bath_i of `base`.
inline PumpPlan make_pump_plan(PumpMode mode, double n1_target, double n2_target, const RateConfig& base) {
  PumpPlan p;
  p.mode = mode;
  const double det = base.detection();
  switch (mode) {
    case PumpMode::one_way:
      p.chi1 = one_way_rate(n1_target, 0.0, det, base.nu1, 0.0, base.n_bath1, 0.0);
      p.chi2 = one_way_rate(0.0, n2_target, det, 0.0, base.nu2, 0.0, base.n_bath2);
      break;
    case PumpMode::two_way:
      p.chi1 = two_way_rate(n1_target, 0.0, det, base.nu1, 0.0, base.n_bath1, 0.0);
      p.chi2 = two_way_rate(0.0, n2_target, det, 0.0, base.nu2, 0.0, base.n_bath2);
      break;
    case PumpMode::regular: {
      const double r1 = (det + base.nu1) * n1_target;
      const double r2 = (det + base.nu2) * n2_target;
      p.injection_period1 = r1 > 0.0 ? 1.0 / r1 : 0.0;
      p.injection_period2 = r2 > 0.0 ? 1.0 / r2 : 0.0;
      break;
    }
    case PumpMode::none:
    case PumpMode::manual:
      break;
  }
  return p;
}

struct Injection {
  double t = 0.0;
  Trap trap = Trap::one;
  friend bool operator==(const Injection&, const Injection&) = default;
};

/// Strictly periodic creation events for one trap: t_j = j / rate for
/// j = 1 ... floor(rate * horizon).
inline std::vector<Injection> regular_injection_times(double rate, double horizon, Trap trap = Trap::one) {
  if (!(rate >= 0.0)) throw std::invalid_argument("regular_injection_times: rate must be >= 0");
  std::vector<Injection> out;
  if (rate == 0.0 || !(horizon > 0.0)) return out;
  const auto count = static_cast<std::int64_t>(std::floor(rate * horizon));
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t j = 1; j <= count; ++j) out.push_back({static_cast<double>(j) / rate, trap});
  return out;
}

/// Both traps' injections merged by time; trap 1 first on ties.
inline std::vector<Injection> regular_injection_times(const PumpPlan& plan, double horizon) {
  if (plan.mode != PumpMode::regular) return {};
  auto rate = [](double period) { return period > 0.0 ? 1.0 / period : 0.0; };
  auto a = regular_injection_times(rate(plan.injection_period1), horizon, Trap::one);
  auto b = regular_injection_times(rate(plan.injection_period2), horizon, Trap::two);
  std::vector<Injection> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].t <= b[j].t)) {
      out.push_back(a[i++]);
    } else {
      out.push_back(b[j++]);
    }
  }
  return out;
}

}  // namespace twintrap
