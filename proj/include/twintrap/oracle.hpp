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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "twintrap/dynamics.hpp"
#include "twintrap/twin_state.hpp"

// Dense integration of the two-mode master equation on a truncated Fock
// space. Used to validate the trajectory unraveling on small systems.

namespace twintrap::oracle {

class CutoffOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two-mode density operator, basis index n1 * (n_max + 1) + n2.
class DensityMatrix {
 public:
  explicit DensityMatrix(int n_max)
      : n_max_(n_max), rho_(Eigen::MatrixXcd::Zero(dim_for(n_max), dim_for(n_max))) {
    if (n_max < 0) throw std::invalid_argument("DensityMatrix: negative cutoff");
  }

  DensityMatrix(int n_max, Eigen::MatrixXcd rho) : n_max_(n_max), rho_(std::move(rho)) {
    if (rho_.rows() != dim_for(n_max) || rho_.cols() != dim_for(n_max)) {
      throw std::invalid_argument("DensityMatrix: dimension does not match cutoff");
    }
  }

  static DensityMatrix number_state(int n1, int n2, int n_max) {
    DensityMatrix d(n_max);
    d.rho_(d.index(n1, n2), d.index(n1, n2)) = 1.0;
    return d;
  }

  /// |t><t| for a pure twin-trap state; every component must fit the cutoff.
  static DensityMatrix pure(const TwinTrapState& s, int n_max) {
    DensityMatrix d(n_max);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d.dim());
    const double norm = std::sqrt(s.norm_sq());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::int64_t k = s.k_min() + static_cast<std::int64_t>(i);
      const auto n1 = s.n1_at(k);
      const auto n2 = s.n2_at(k);
      if (n1 > n_max || n2 > n_max) throw CutoffOverflow("DensityMatrix::pure: component beyond cutoff");
      v(d.index(static_cast<int>(n1), static_cast<int>(n2))) = s.coeffs()[i] / norm;
    }
    d.rho_ = v * v.adjoint();
    return d;
  }

  int n_max() const { return n_max_; }
  Eigen::Index dim() const { return rho_.rows(); }
  Eigen::Index index(int n1, int n2) const {
    if (n1 < 0 || n2 < 0 || n1 > n_max_ || n2 > n_max_) throw std::out_of_range("DensityMatrix::index");
    return static_cast<Eigen::Index>(n1) * (n_max_ + 1) + n2;
  }

  const Eigen::MatrixXcd& matrix() const { return rho_; }
  Eigen::MatrixXcd& matrix() { return rho_; }

  Complex trace() const { return rho_.trace(); }

  /// Total population of basis states with either occupancy at the cutoff.
  double boundary_population() const {
    double p = 0.0;
    for (int a = 0; a <= n_max_; ++a) {
      for (int b = 0; b <= n_max_; ++b) {
        if (a == n_max_ || b == n_max_) p += rho_(index(a, b), index(a, b)).real();
      }
    }
    return p;
  }

  void hermitize() {
    const Eigen::Index d = rho_.rows();
    for (Eigen::Index j = 0; j < d; ++j) {
      rho_(j, j) = Complex(rho_(j, j).real(), 0.0);
      for (Eigen::Index i = j + 1; i < d; ++i) {
        const Complex m = 0.5 * (rho_(i, j) + std::conj(rho_(j, i)));
        rho_(i, j) = m;
        rho_(j, i) = std::conj(m);
      }
    }
  }

 private:
  static Eigen::Index dim_for(int n_max) { return static_cast<Eigen::Index>(n_max + 1) * (n_max + 1); }

  int n_max_;
  Eigen::MatrixXcd rho_;
};

namespace detail {

/// One ladder channel: rate * D[L] with L shifting a single mode by one quantum.
struct LadderChannel {
  double rate = 0.0;
  std::vector<Eigen::Index> source;  // basis index feeding each target, -1 if none
  std::vector<double> amplitude;     // <target|L|source>
};

}  // namespace detail

/// Precomputed structure of the master-equation generator for one cutoff
/// and rate set. Evaluation is elementwise, O(dim^2) per channel.
class Liouvillian {
 public:
  Liouvillian(int n_max, const RateConfig& rates) : n_max_(n_max) {
    rates.validate();
    const Eigen::Index d = static_cast<Eigen::Index>(n_max + 1) * (n_max + 1);
    energy_.resize(d);
    decay_.assign(static_cast<std::size_t>(d), 0.0);
    const bool unit_gain = rates.gain_model == GainModel::constant;
    add(d, rates.detection() + rates.loss(Trap::one), 1, true, false);
    add(d, rates.detection() + rates.loss(Trap::two), 2, true, false);
    add(d, rates.gain(Trap::one), 1, false, unit_gain);
    add(d, rates.gain(Trap::two), 2, false, unit_gain);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double n1 = static_cast<double>(i / (n_max + 1));
      const double n2 = static_cast<double>(i % (n_max + 1));
      energy_(i) = 0.5 * rates.kappa * (n1 * n1 + n2 * n2);
    }
  }

  int n_max() const { return n_max_; }

  /// out = L[rho].
  void apply(const Eigen::MatrixXcd& r, Eigen::MatrixXcd& out) const {
    const Eigen::Index d = r.rows();
    out.resize(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) {
        out(i, j) = Complex(-0.5 * (decay_[static_cast<std::size_t>(i)] + decay_[static_cast<std::size_t>(j)]),
                            energy_(j) - energy_(i)) *
                    r(i, j);
      }
    }
    for (const auto& ch : channels_) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const auto sj = ch.source[static_cast<std::size_t>(j)];
        if (sj < 0) continue;
        const double aj = ch.rate * ch.amplitude[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < d; ++i) {
          const auto si = ch.source[static_cast<std::size_t>(i)];
          if (si < 0) continue;
          out(i, j) += aj * ch.amplitude[static_cast<std::size_t>(i)] * r(si, sj);
        }
      }
    }
  }

 private:
  void add(Eigen::Index d, double rate, int mode, bool lower, bool unit_ladder) {
    if (rate == 0.0) return;
    detail::LadderChannel ch;
    ch.rate = rate;
    ch.source.assign(static_cast<std::size_t>(d), -1);
    ch.amplitude.assign(static_cast<std::size_t>(d), 0.0);
    const int nm = n_max_;
    for (Eigen::Index i = 0; i < d; ++i) {
      const int n1 = static_cast<int>(i / (nm + 1));
      const int n2 = static_cast<int>(i % (nm + 1));
      const int n = mode == 1 ? n1 : n2;
      // <n|L^dag L|n> in the truncated space.
      double ldl = 0.0;
      if (lower) {
        ldl = unit_ladder ? (n > 0 ? 1.0 : 0.0) : static_cast<double>(n);
      } else if (n < nm) {
        ldl = unit_ladder ? 1.0 : static_cast<double>(n + 1);
      }
      decay_[static_cast<std::size_t>(i)] += rate * ldl;
      const int src = lower ? n + 1 : n - 1;
      if (src < 0 || src > nm) continue;
      const int s1 = mode == 1 ? src : n1;
      const int s2 = mode == 1 ? n2 : src;
      ch.source[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(s1) * (nm + 1) + s2;
      ch.amplitude[static_cast<std::size_t>(i)] =
          unit_ladder ? 1.0 : std::sqrt(static_cast<double>(lower ? src : n));
    }
    channels_.push_back(std::move(ch));
  }

  int n_max_;
  Eigen::VectorXd energy_;
  std::vector<double> decay_;  // sum over channels of rate <n|L^dag L|n>
  std::vector<detail::LadderChannel> channels_;
};

/// d rho / dt for the full master equation. The phi-integrated detection
/// term is reduced analytically to detection() * (D[a1] + D[a2]).
inline DensityMatrix liouvillian_rhs(const DensityMatrix& rho, const RateConfig& rates) {
  Eigen::MatrixXcd out;
  Liouvillian(rho.n_max(), rates).apply(rho.matrix(), out);
  return DensityMatrix(rho.n_max(), std::move(out));
}

/// Matrix of a_mode on the truncated two-mode space.
inline Eigen::MatrixXcd annihilation_matrix(int n_max, int mode) {
  DensityMatrix shape(n_max);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(shape.dim(), shape.dim());
  for (int n1 = 0; n1 <= n_max; ++n1) {
    for (int n2 = 0; n2 <= n_max; ++n2) {
      const int n = mode == 1 ? n1 : n2;
      if (n == 0) continue;
      const auto to = mode == 1 ? shape.index(n1 - 1, n2) : shape.index(n1, n2 - 1);
      a(to, shape.index(n1, n2)) = std::sqrt(static_cast<double>(n));
    }
  }
  return a;
}

/// gamma * sum_j w_j D[psi(phi_j)] rho on `nodes` equally spaced phases with
/// weights 1 / nodes (normalized measure) or 2 pi / nodes (bare measure).
/// Built from explicit operator products, independently of liouvillian_rhs.
inline Eigen::MatrixXcd detection_term_quadrature(const DensityMatrix& rho, double gamma, int nodes,
                                                  DetectionMeasure measure = DetectionMeasure::normalized) {
  if (nodes < 1) throw std::invalid_argument("detection_term_quadrature: nodes must be >= 1");
  const Eigen::MatrixXcd a1 = annihilation_matrix(rho.n_max(), 1);
  const Eigen::MatrixXcd a2 = annihilation_matrix(rho.n_max(), 2);
  const auto& r = rho.matrix();
  const double total = measure == DetectionMeasure::bare ? 2.0 * std::numbers::pi : 1.0;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.dim(), rho.dim());
  for (int j = 0; j < nodes; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / nodes;
    const Eigen::MatrixXcd psi = a1 + std::polar(1.0, -phi) * a2;
    const Eigen::MatrixXcd pdp = psi.adjoint() * psi;
    out += (total / nodes) * (psi * r * psi.adjoint() - 0.5 * (pdp * r + r * pdp));
  }
  return gamma * out;
}

enum class Observable { n1, n2, n1_sq, n2_sq, cross_coherence };

/// Tr[rho O].
inline Complex expectation(const DensityMatrix& rho, Observable o) {
  const int nm = rho.n_max();
  const auto& r = rho.matrix();
  Complex acc{};
  for (int a = 0; a <= nm; ++a) {
    for (int b = 0; b <= nm; ++b) {
      const auto i = rho.index(a, b);
      const double p = r(i, i).real();
      switch (o) {
        case Observable::n1: acc += p * a; break;
        case Observable::n2: acc += p * b; break;
        case Observable::n1_sq: acc += p * a * a; break;
        case Observable::n2_sq: acc += p * b * b; break;
        case Observable::cross_coherence:
          // <a|a1^dag a2|...>: a1^dag a2 |a-1, b+1> = sqrt(a (b+1)) |a, b>
          if (a >= 1 && b + 1 <= nm) {
            acc += std::sqrt(static_cast<double>(a) * (b + 1)) * r(rho.index(a - 1, b + 1), i);
          }
          break;
      }
    }
  }
  return acc;
}

struct IntegrateOptions {
  /// Fixed RK4 step; <= 0 selects min(1e-3, 0.05 / Gamma_max).
  double step = 0.0;
  /// Largest permitted population at the Fock cutoff.
  double boundary_tolerance = 1e-8;
};

/// Largest diagonal decay rate over the truncated basis.
inline double max_decay_rate(int n_max, const RateConfig& r) {
  const double nm = n_max;
  return (r.detection() + r.loss(Trap::one)) * nm + (r.detection() + r.loss(Trap::two)) * nm +
         (r.gain_model == GainModel::stimulated ? r.gain(Trap::one) * (nm + 1.0) + r.gain(Trap::two) * (nm + 1.0)
                                                : r.gain(Trap::one) + r.gain(Trap::two));
}

inline double default_step(int n_max, const RateConfig& r) {
  const double g = max_decay_rate(n_max, r);
  return g > 0.0 ? std::min(1e-3, 0.05 / g) : 1e-3;
}

inline void check_cutoff(const DensityMatrix& rho, double tol) {
  const double p = rho.boundary_population();
  if (p > tol) {
    throw CutoffOverflow("cutoff overflow: population " + std::to_string(p) + " at n_max = " +
                         std::to_string(rho.n_max()));
  }
}

/// Fixed-step RK4 integration; returns rho at each requested time.
inline std::vector<DensityMatrix> integrate(const DensityMatrix& rho0, const RateConfig& rates,
                                            std::span<const double> t_grid, const IntegrateOptions& opt = {}) {
  rates.validate();
  const double h_max = opt.step > 0.0 ? opt.step : default_step(rho0.n_max(), rates);
  std::vector<DensityMatrix> out;
  out.reserve(t_grid.size());
  const Liouvillian gen(rho0.n_max(), rates);
  DensityMatrix rho = rho0;
  const Eigen::Index d = rho.dim();
  Eigen::MatrixXcd k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d);
  double t = 0.0;
  check_cutoff(rho, opt.boundary_tolerance);
  for (const double target : t_grid) {
    if (target < t) throw std::invalid_argument("integrate: t_grid must be increasing from 0");
    const auto steps = static_cast<long>(std::ceil((target - t) / h_max - 1e-9));
    const double h = steps > 0 ? (target - t) / static_cast<double>(steps) : 0.0;
    for (long s = 0; s < steps; ++s) {
      auto& r = rho.matrix();
      gen.apply(r, k1);
      tmp.noalias() = r + (0.5 * h) * k1;
      gen.apply(tmp, k2);
      tmp.noalias() = r + (0.5 * h) * k2;
      gen.apply(tmp, k3);
      tmp.noalias() = r + h * k3;
      gen.apply(tmp, k4);
      r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      rho.hermitize();
      check_cutoff(rho, opt.boundary_tolerance);
    }
    t = target;
    out.push_back(rho);
  }
  return out;
}

}  // namespace twintrap::oracle
