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
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twintrap {

using Complex = std::complex<double>;

enum class Trap : int { one = 1, two = 2 };

inline constexpr double kDefaultTruncation = 1e-12;

/// Raised when an operation would leave a state with no components.
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Entangled two-trap state sum_k c_k |n1 - k, n2 + k> of fixed total number.
///
/// Amplitudes are stored contiguously for k = k_min ... k_min + size() - 1.
/// The support stays a contiguous k-interval because every operator in the
/// model couples only neighbouring k.
class TwinTrapState {
 public:
  TwinTrapState() : TwinTrapState(number_state(0, 0)) {}

  TwinTrapState(std::int64_t base_n1, std::int64_t base_n2, std::int64_t k_min,
                std::vector<Complex> coeffs)
      : base_n1_(base_n1), base_n2_(base_n2), k_min_(k_min), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw StateError("TwinTrapState: no components");
    if (base_n1_ < 0 || base_n2_ < 0) {
      throw std::invalid_argument("TwinTrapState: negative base occupancy");
    }
    if (n2_at(k_min_) < 0 || n1_at(k_max()) < 0) {
      throw std::invalid_argument("TwinTrapState: component with negative occupancy");
    }
  }

  static TwinTrapState number_state(std::int64_t n1, std::int64_t n2) {
    return TwinTrapState(n1, n2, 0, {Complex(1.0, 0.0)});
  }

  std::int64_t base_n1() const { return base_n1_; }
  std::int64_t base_n2() const { return base_n2_; }
  std::int64_t k_min() const { return k_min_; }
  std::int64_t k_max() const { return k_min_ + static_cast<std::int64_t>(coeffs_.size()) - 1; }
  std::size_t size() const { return coeffs_.size(); }
  std::int64_t total_number() const { return base_n1_ + base_n2_; }

  std::int64_t n1_at(std::int64_t k) const { return base_n1_ - k; }
  std::int64_t n2_at(std::int64_t k) const { return base_n2_ + k; }
  std::int64_t occupancy(Trap trap, std::int64_t k) const {
    return trap == Trap::one ? n1_at(k) : n2_at(k);
  }

  std::span<const Complex> coeffs() const { return coeffs_; }
  std::span<Complex> coeffs() { return coeffs_; }

  /// c_k, or zero outside the retained interval.
  Complex coeff(std::int64_t k) const {
    if (k < k_min_ || k > k_max()) return {};
    return coeffs_[static_cast<std::size_t>(k - k_min_)];
  }

  double norm_sq() const {
    double s = 0.0;
    for (const auto& c : coeffs_) s += std::norm(c);
    return s;
  }

  /// Rescales to unit norm and rotates the global phase so that the
  /// largest-magnitude amplitude (first one on ties) is real and positive.
  void normalize() {
    std::size_t imax = 0;
    double amax = -1.0;
    double s = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      const double a = std::norm(coeffs_[i]);
      s += a;
      if (a > amax) {
        amax = a;
        imax = i;
      }
    }
    if (!(s > 0.0)) throw StateError("normalize: zero-norm state");
    const Complex phase = std::conj(coeffs_[imax]) / std::abs(coeffs_[imax]);
    const Complex scale = phase / std::sqrt(s);
    for (auto& c : coeffs_) c *= scale;
    coeffs_[imax] = Complex(coeffs_[imax].real(), 0.0);
  }

  friend bool operator==(const TwinTrapState&, const TwinTrapState&) = default;

 private:
  std::int64_t base_n1_ = 0;
  std::int64_t base_n2_ = 0;
  std::int64_t k_min_ = 0;
  std::vector<Complex> coeffs_;
};

inline TwinTrapState new_number_state(std::int64_t n1, std::int64_t n2) {
  if (n1 < 0 || n2 < 0) throw std::invalid_argument("new_number_state: negative occupancy");
  return TwinTrapState::number_state(n1, n2);
}

enum class OpStatus { ok, annihilated_vacuum };

/// Result of applying a jump operator: the renormalized image and the
/// squared norm of the unnormalized image relative to the input norm.
struct OpResult {
  TwinTrapState state;
  double weight = 0.0;
  OpStatus status = OpStatus::ok;

  bool ok() const { return status == OpStatus::ok; }
};

namespace detail {

// Drops leading/trailing components whose occupancies are invalid for the new
// base, then normalizes. `w` is the unnormalized squared norm.
inline OpResult finish(std::int64_t b1, std::int64_t b2, std::int64_t k_lo,
                       std::vector<Complex> v, double input_norm_sq,
                       const TwinTrapState& original) {
  std::int64_t lo = k_lo;
  std::size_t first = 0;
  std::size_t last = v.size();
  while (first < last && (b2 + lo) < 0) {
    ++first;
    ++lo;
  }
  while (last > first && (b1 - (k_lo + static_cast<std::int64_t>(last) - 1)) < 0) --last;
  double w = 0.0;
  for (std::size_t i = first; i < last; ++i) w += std::norm(v[i]);
  if (first == last || !(w > 0.0)) {
    return {original, 0.0, OpStatus::annihilated_vacuum};
  }
  std::vector<Complex> kept(v.begin() + static_cast<std::ptrdiff_t>(first),
                            v.begin() + static_cast<std::ptrdiff_t>(last));
  if (b1 < 0 || b2 < 0) {
    // Re-base on the first retained component; every retained occupancy is valid.
    b1 -= lo;
    b2 += lo;
    lo = 0;
  }
  TwinTrapState out(b1, b2, lo, std::move(kept));
  out.normalize();
  return {std::move(out), w / input_norm_sq, OpStatus::ok};
}

}  // namespace detail

/// a_i |t>, renormalized; weight is <n_i>.
inline OpResult apply_annihilation(const TwinTrapState& s, Trap trap) {
  const double in = s.norm_sq();
  std::vector<Complex> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::int64_t k = s.k_min() + static_cast<std::int64_t>(i);
    const auto n = static_cast<double>(s.occupancy(trap, k));
    v[i] = s.coeffs()[i] * std::sqrt(n);
  }
  const std::int64_t b1 = s.base_n1() - (trap == Trap::one ? 1 : 0);
  const std::int64_t b2 = s.base_n2() - (trap == Trap::two ? 1 : 0);
  return detail::finish(b1, b2, s.k_min(), std::move(v), in, s);
}

/// a_i^dagger |t>, renormalized; weight is <n_i> + 1.
inline OpResult apply_creation(const TwinTrapState& s, Trap trap) {
  const double in = s.norm_sq();
  std::vector<Complex> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::int64_t k = s.k_min() + static_cast<std::int64_t>(i);
    const auto n = static_cast<double>(s.occupancy(trap, k));
    v[i] = s.coeffs()[i] * std::sqrt(n + 1.0);
  }
  const std::int64_t b1 = s.base_n1() + (trap == Trap::one ? 1 : 0);
  const std::int64_t b2 = s.base_n2() + (trap == Trap::two ? 1 : 0);
  return detail::finish(b1, b2, s.k_min(), std::move(v), in, s);
}

/// Phase-only raising operator sum_n |n+1><n| on one trap (weight 1). Jump
/// operator of the occupancy-independent gain model.
inline OpResult apply_raising(const TwinTrapState& s, Trap trap) {
  std::vector<Complex> v(s.coeffs().begin(), s.coeffs().end());
  const double in = s.norm_sq();
  const std::int64_t b1 = s.base_n1() + (trap == Trap::one ? 1 : 0);
  const std::int64_t b2 = s.base_n2() + (trap == Trap::two ? 1 : 0);
  return detail::finish(b1, b2, s.k_min(), std::move(v), in, s);
}

/// psi(phi) = a1 + exp(-i phi) a2 applied to |t>; the image is expressed on
/// the base (n1 - 1, n2) with c'_k = sqrt(n1-k) c_k + e^{-i phi} sqrt(n2+k+1) c_{k+1}.
inline OpResult apply_detection_operator(const TwinTrapState& s, double phi) {
  if (s.total_number() == 0) return {s, 0.0, OpStatus::annihilated_vacuum};
  const double in = s.norm_sq();
  const Complex ph = std::polar(1.0, -phi);
  const std::int64_t k_lo = s.k_min() - 1;
  const std::int64_t k_hi = s.k_max();
  std::vector<Complex> v(static_cast<std::size_t>(k_hi - k_lo + 1));
  for (std::int64_t k = k_lo; k <= k_hi; ++k) {
    const double n1 = static_cast<double>(std::max<std::int64_t>(s.n1_at(k), 0));
    const double n2 = static_cast<double>(std::max<std::int64_t>(s.n2_at(k) + 1, 0));
    v[static_cast<std::size_t>(k - k_lo)] =
        std::sqrt(n1) * s.coeff(k) + ph * std::sqrt(n2) * s.coeff(k + 1);
  }
  return detail::finish(s.base_n1() - 1, s.base_n2(), k_lo, std::move(v), in, s);
}

/// Trims end components with |c_k| < threshold and renormalizes. Interior
/// small amplitudes are kept so the support stays contiguous.
inline TwinTrapState truncate(const TwinTrapState& s, double threshold) {
  if (threshold < 0.0) throw std::invalid_argument("truncate: negative threshold");
  const auto c = s.coeffs();
  std::size_t first = 0;
  std::size_t last = c.size();
  while (first < last && std::abs(c[first]) < threshold) ++first;
  while (last > first && std::abs(c[last - 1]) < threshold) --last;
  if (first == last) throw StateError("truncate: state emptied");
  if (first == 0 && last == c.size()) return s;
  TwinTrapState out(s.base_n1(), s.base_n2(), s.k_min() + static_cast<std::int64_t>(first),
                    std::vector<Complex>(c.begin() + static_cast<std::ptrdiff_t>(first),
                                         c.begin() + static_cast<std::ptrdiff_t>(last)));
  out.normalize();
  return out;
}

}  // namespace twintrap
