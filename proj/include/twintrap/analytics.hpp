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
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "twintrap/twin_state.hpp"

namespace twintrap {

/// Fringe visibility of two coherent condensates with relative occupancy f.
inline double visibility_from_occupancy(double f) {
  if (!(std::abs(f) <= 1.0)) throw std::domain_error("visibility_from_occupancy: |f| must be <= 1");
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

/// Average of sqrt(1 - f^2) over independent thermal (continuous-limit)
/// occupancies with means nbar1, nbar2.
///
/// With a_i = -log(nbar_i / (nbar_i + 1)) the closed form is
///   2 pi a1 a2 / (a1 - a2)^2 * (1 / sqrt(1 - r^2) - 1),  r = (a1 - a2) / (a1 + a2).
/// It is evaluated as 2 pi a1 a2 / ((a1 + a2)^2 s (1 + s)) with s = sqrt(1 - r^2),
/// the same expression with the removable singularity at a1 = a2 cancelled.
inline double mean_visibility_exact(double nbar1, double nbar2) {
  if (!(nbar1 > 0.0) || !(nbar2 > 0.0)) throw std::domain_error("mean_visibility_exact: means must be > 0");
  if (nbar1 == nbar2) return std::numbers::pi / 4.0;
  const double a1 = std::log1p(1.0 / nbar1);
  const double a2 = std::log1p(1.0 / nbar2);
  const double sum = a1 + a2;
  const double r = (a1 - a2) / sum;
  const double s = std::sqrt(1.0 - r * r);
  return 2.0 * std::numbers::pi * a1 * a2 / (sum * sum * s * (1.0 + s));
}

/// Large-occupancy limit of mean_visibility_exact with p = nbar1 / nbar2.
inline double mean_visibility_asymptotic(double p) {
  if (!(p > 0.0)) throw std::domain_error("mean_visibility_asymptotic: p must be > 0");
  const double q = std::sqrt(p);
  return std::numbers::pi * q / ((1.0 + q) * (1.0 + q));
}

/// Gaussian collapse of the visibility, exp(-2 sigma_A^2 kappa^2 t^2).
inline double collapse_envelope(double sigma_A, double kappa, double t) {
  if (sigma_A < 0.0 || kappa < 0.0) throw std::domain_error("collapse_envelope: negative argument");
  const double x = sigma_A * kappa * t;
  return std::exp(-2.0 * x * x);
}

struct ACoefficients {
  std::vector<double> a;  // a[j] pairs components (k_first + j, k_first + j + 1)
  std::int64_t k_first = 0;
  double sigma_A = 0.0;
};

namespace detail {

inline double weight_stddev(std::span<const double> a) {
  double w = 0.0;
  double m = 0.0;
  std::size_t nonzero = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    w += a[j];
    m += a[j] * static_cast<double>(j);
    if (a[j] > 0.0) ++nonzero;
  }
  if (nonzero < 2) return 0.0;
  m /= w;
  double v = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = static_cast<double>(j) - m;
    v += a[j] * d * d;
  }
  return std::sqrt(v / w);
}

}  // namespace detail

/// Neighbour-overlap coefficients |c_k c_{k+1}| sqrt(n1(k) n2(k+1)) using the
/// state's own occupancies, and the width of their normalized profile.
inline ACoefficients a_coefficients(const TwinTrapState& s) {
  ACoefficients out;
  out.k_first = s.k_min();
  const auto c = s.coeffs();
  if (c.size() < 2) return out;
  out.a.resize(c.size() - 1);
  for (std::size_t j = 0; j + 1 < c.size(); ++j) {
    const std::int64_t k = s.k_min() + static_cast<std::int64_t>(j);
    const double occ = static_cast<double>(s.n1_at(k)) * static_cast<double>(s.n2_at(k + 1));
    out.a[j] = std::abs(c[j]) * std::abs(c[j + 1]) * std::sqrt(occ);
  }
  out.sigma_A = detail::weight_stddev(out.a);
  return out;
}

/// Same coefficients written for a state prepared from |n, n> by m
/// detections: A(k) = |c_k c_{k-1}| sqrt((n - k + 1)(n - m + k)), where trap 1
/// holds n - m + k atoms. Occupancy factors clamp at zero for states that did
/// not arise this way.
inline ACoefficients a_coefficients(const TwinTrapState& s, std::int64_t m_detections, std::int64_t n_initial) {
  ACoefficients out;
  out.k_first = s.k_min();
  const auto c = s.coeffs();
  if (c.size() < 2) return out;
  out.a.resize(c.size() - 1);
  for (std::size_t j = 0; j + 1 < c.size(); ++j) {
    const std::int64_t k_self = s.k_min() + static_cast<std::int64_t>(j);
    // Index in the |n - m + k, n - k> labelling of the upper member of the pair.
    const std::int64_t k = s.n1_at(k_self) - (n_initial - m_detections);
    const double f1 = static_cast<double>(std::max<std::int64_t>(n_initial - k + 1, 0));
    const double f2 = static_cast<double>(std::max<std::int64_t>(n_initial - m_detections + k, 0));
    out.a[j] = std::abs(c[j]) * std::abs(c[j + 1]) * std::sqrt(f1 * f2);
  }
  out.sigma_A = detail::weight_stddev(out.a);
  return out;
}

struct Timescales {
  double tau_entangle = 0.0;
  double tau_replace = 0.0;
};

/// Time to build an entangled state of ~sqrt(n) width, and the two-way
/// replacement time of all atoms.
inline Timescales timescales(double n, double gamma) {
  if (!(n > 0.0)) throw std::domain_error("timescales: n must be > 0");
  if (!(gamma > 0.0)) throw std::domain_error("timescales: gamma must be > 0");
  return {1.0 / (std::sqrt(n) * gamma), 1.0 / (n * gamma)};
}

struct CollapseFit {
  std::vector<double> peak_times;
  std::vector<double> peak_heights;
  std::vector<double> widths;  // Gaussian sigma_t of each revival peak
  std::vector<double> sigma_A_estimates;
  double period = std::numeric_limits<double>::quiet_NaN();
};

struct CollapseFitOptions {
  double prominence = 0.05;
  /// Flank points used in the fit satisfy V >= V_peak * exp(-log_window).
  double log_window = 0.5;
};

namespace detail {

inline double prominence(std::span<const double> v, std::size_t i) {
  double left = v[i];
  for (std::size_t j = i; j-- > 0;) {
    if (v[j] > v[i]) break;
    left = std::min(left, v[j]);
  }
  double right = v[i];
  for (std::size_t j = i + 1; j < v.size(); ++j) {
    if (v[j] > v[i]) break;
    right = std::min(right, v[j]);
  }
  return v[i] - std::max(left, right);
}

}  // namespace detail

/// Locates revival peaks of a visibility series and fits each peak with
/// log V = a + s (t - t_peak)^2, converting s = -2 sigma_A^2 kappa^2.
inline CollapseFit fit_collapse_revival(std::span<const double> t, std::span<const double> v, double kappa,
                                        const CollapseFitOptions& opt = {}) {
  if (t.size() != v.size()) throw std::invalid_argument("fit_collapse_revival: size mismatch");
  if (!(kappa > 0.0)) throw std::domain_error("fit_collapse_revival: kappa must be > 0");
  CollapseFit fit;
  const std::size_t n = v.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(v[i] > v[i - 1] && v[i] >= v[i + 1])) continue;
    if (!(v[i] > 0.0) || detail::prominence(v, i) < opt.prominence) continue;

    // Vertex of the parabola through log V at i-1, i, i+1.
    double tp = t[i];
    if (v[i - 1] > 0.0 && v[i + 1] > 0.0) {
      const double y0 = std::log(v[i - 1]);
      const double y1 = std::log(v[i]);
      const double y2 = std::log(v[i + 1]);
      const double den = y0 - 2.0 * y1 + y2;
      if (den < 0.0) tp = t[i] + 0.5 * (y0 - y2) / den * (t[i + 1] - t[i]);
    }

    const double floor = v[i] * std::exp(-opt.log_window);
    std::size_t lo = i;
    while (lo > 0 && v[lo - 1] >= floor && v[lo - 1] <= v[lo]) --lo;
    std::size_t hi = i;
    while (hi + 1 < n && v[hi + 1] >= floor && v[hi + 1] <= v[hi]) ++hi;
    if (hi - lo + 1 < 3) continue;

    // Least squares for y = a + s x with x = (t - tp)^2.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const auto m = static_cast<double>(hi - lo + 1);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double x = (t[j] - tp) * (t[j] - tp);
      const double y = std::log(v[j]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double den = m * sxx - sx * sx;
    if (!(den > 0.0)) continue;
    const double slope = (m * sxy - sx * sy) / den;
    if (!(slope < 0.0)) continue;
    fit.peak_times.push_back(tp);
    fit.peak_heights.push_back(std::exp((sy - slope * sx) / m));
    fit.widths.push_back(std::sqrt(-0.5 / slope));
    fit.sigma_A_estimates.push_back(std::sqrt(-0.5 * slope) / kappa);
  }
  if (fit.peak_times.empty()) throw std::runtime_error("fit_collapse_revival: no peaks found");
  if (fit.peak_times.size() >= 2) {
    fit.period = (fit.peak_times.back() - fit.peak_times.front()) /
                 static_cast<double>(fit.peak_times.size() - 1);
  }
  return fit;
}

}  // namespace twintrap
