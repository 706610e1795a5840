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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "support/properties.hpp"
#include "twintrap/dynamics.hpp"

namespace twintrap {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TwinTrapState superposition(std::int64_t b1, std::int64_t b2, std::int64_t k_min, std::vector<Complex> c) {
  TwinTrapState s(b1, b2, k_min, std::move(c));
  s.normalize();
  return s;
}

// Plain bisection for the root of f on [lo, hi], f(lo) > 0 > f(hi).
template <class F>
double bisect(F f, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TEST(DecayRate, Examples) {
  EXPECT_DOUBLE_EQ(per_component_decay_rate(new_number_state(1, 1), RateConfig{}, 0), 2.0);
  EXPECT_DOUBLE_EQ(per_component_decay_rate(new_number_state(2, 2), RateConfig{.nu1 = 1.0}, 0), 6.0);
  const RateConfig one_way{.chi1_in = 1e-9, .chi2_in = 1e-9, .n_bath1 = 1e6, .n_bath2 = 1e6};
  EXPECT_NEAR(per_component_decay_rate(new_number_state(2, 2), one_way, 0), 4.0 + 3e-3 + 3e-3, 1e-15);
}

TEST(DecayRate, ConstantGainIsOccupancyIndependent) {
  RateConfig r{.gamma = 0.0, .chi1_in = 0.1, .n_bath1 = 10};
  r.gain_model = GainModel::constant;
  EXPECT_DOUBLE_EQ(per_component_decay_rate(new_number_state(7, 0), r, 0), 1.0);
  r.gain_model = GainModel::stimulated;
  EXPECT_DOUBLE_EQ(per_component_decay_rate(new_number_state(7, 0), r, 0), 8.0);
}

TEST(Propagate, SingleComponentKeepsObservables) {
  const auto s = new_number_state(6, 3);
  const RateConfig r{.kappa = 0.7, .nu1 = 0.2};
  const auto p = propagate(s, r, 1.3);
  const auto a = observe(s);
  const auto b = observe(p);
  EXPECT_EQ(a.n1_mean, b.n1_mean);
  EXPECT_EQ(a.sigma_n, b.sigma_n);
  EXPECT_NEAR(p.norm_sq(), std::exp(-(9.0 + 0.2 * 6.0) * 1.3), 1e-15);
}

TEST(Propagate, CoherenceRevivesAfterPiOverKappa) {
  const auto s = superposition(6, 6, -2, {0.2, Complex(0.5, 0.1), 0.7, 0.4, Complex(0.1, -0.3)});
  const RateConfig r{.gamma = 0.0, .kappa = 0.25};
  const double x0 = std::abs(cross_coherence(s));
  EXPECT_GT(std::abs(std::abs(cross_coherence(propagate(s, r, 0.3 * std::numbers::pi / 0.25))) - x0), 1e-3);
  EXPECT_NEAR(std::abs(cross_coherence(propagate(s, r, std::numbers::pi / 0.25))), x0, 1e-12);
}

TEST(Propagate, NormFollowsWeightedDecay) {
  // Two components of weight 1/2 with Gamma = {1, 3}; norm^2 = (x + x^3)/2
  // with x = e^{-dt}, which is 1/2 where x + x^3 = 1.
  const double x = bisect([](double y) { return 1.0 - (y + y * y * y); }, 0.0, 1.0);
  const double dt = -std::log(x);
  EXPECT_NEAR(dt, 0.3822, 5e-5);
  // gamma = 0 and an output coupler on trap 1: Gamma_k = n1 - k, so k = 0
  // and k = 2 on |3,3> decay at 3 and 1.
  const RateConfig r{.gamma = 0.0, .nu1 = 1.0};
  const auto two = superposition(3, 3, 0, {1.0, 0.0, 1.0});
  EXPECT_NEAR(propagate(two, r, dt).norm_sq(), 0.5, 1e-12);
  EXPECT_NEAR(propagate(two, r, 0.3822).norm_sq(), 0.5, 1e-4);
}

TEST(Propagate, LargeCollisionPhaseMatchesExtendedPrecision) {
  const auto s = superposition(1000, 1000, -1, {0.6, Complex(0.5, 0.2), 0.59});
  const RateConfig r{.gamma = 0.0, .kappa = 1.0};
  const double dt = 1.0;  // kappa n^2 dt ~ 1e6
  const auto p = propagate(s, r, dt);
  for (auto k = s.k_min(); k <= s.k_max(); ++k) {
    const long double n1 = 1000.0L - k;
    const long double n2 = 1000.0L + k;
    const long double ph = std::fmod(0.5L * (n1 * n1 + n2 * n2) * static_cast<long double>(dt), 2.0L * std::numbers::pi_v<long double>);
    const Complex rot(static_cast<double>(std::cos(ph)), static_cast<double>(-std::sin(ph)));
    EXPECT_LT(std::abs(p.coeff(k) - s.coeff(k) * rot), 1e-9) << "k = " << k;
  }
}

TEST(Propagate, RejectsNegativeTime) {
  EXPECT_THROW(propagate(new_number_state(1, 1), RateConfig{}, -1.0), std::invalid_argument);
}

TEST(WaitingTime, Examples) {
  EXPECT_NEAR(sample_waiting_time(new_number_state(1, 1), RateConfig{}, std::exp(-1.0)), 0.5, 1e-12);

  const RateConfig r{.gamma = 0.0, .nu1 = 1.0};
  const auto two = superposition(3, 3, 0, {1.0, 0.0, 1.0});
  const double ref = bisect([](double t) { return 0.5 * (std::exp(-t) + std::exp(-3 * t)) - 0.5; }, 0.0, 5.0);
  // x + x^3 = 1 with x = e^{-t}: t = 0.382245, quoted to four places as 0.3822.
  EXPECT_NEAR(ref, 0.38216, 1e-4);
  EXPECT_NEAR(sample_waiting_time(two, r, 0.5), ref, 1e-11);

  EXPECT_EQ(sample_waiting_time(two, r, 1.0), 0.0);
  EXPECT_TRUE(std::isinf(sample_waiting_time(new_number_state(0, 0), RateConfig{}, 0.3)));
  EXPECT_THROW(sample_waiting_time(two, r, 0.0), std::invalid_argument);
}

TEST(WaitingTime, ZeroRateComponentGivesInfiniteTailOnly) {
  // Component k with Gamma = 0 holds 1/4 of the norm: u below 1/4 never jumps.
  const RateConfig r{.gamma = 0.0, .nu1 = 1.0};
  const auto s = superposition(1, 0, 0, {1.0, std::sqrt(1.0 / 3.0)});  // k=1 -> n1 = 0
  EXPECT_TRUE(std::isinf(sample_waiting_time(s, r, 0.2)));
  EXPECT_NEAR(sample_waiting_time(s, r, 0.5), std::log(3.0), 1e-11);  // 3/4 e^{-t} + 1/4 = 1/2
}

TEST(SelectChannel, Examples) {
  const auto s = new_number_state(2, 2);
  const RateConfig r{.nu1 = 1.0};
  const auto cr = channel_rates(s, r);
  EXPECT_NEAR(cr.detect / cr.total(), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(cr.loss1 / cr.total(), 1.0 / 3.0, 1e-15);
  EXPECT_TRUE(std::holds_alternative<Detect>(select_channel(s, r, 0.66)));
  EXPECT_TRUE(std::holds_alternative<Loss>(select_channel(s, r, 0.67)));

  const RateConfig gains{.gamma = 0.0, .chi1_in = 0.5, .chi2_in = 0.5, .n_bath1 = 2, .n_bath2 = 2};
  const auto g = channel_rates(new_number_state(0, 0), gains);
  EXPECT_NEAR(g.gain1 / g.total(), 0.5, 1e-15);
  EXPECT_EQ(std::get<Gain>(select_channel(new_number_state(0, 0), gains, 0.49)).trap, Trap::one);
  EXPECT_EQ(std::get<Gain>(select_channel(new_number_state(0, 0), gains, 0.51)).trap, Trap::two);
}

TEST(SelectChannel, FrequenciesMatchRates) {
  const auto s = superposition(5, 3, -1, {0.5, 0.7, Complex(0.2, 0.4)});
  const RateConfig r{.gamma = 1.0, .nu1 = 0.3, .nu2 = 0.1, .chi1_in = 0.02, .chi1_out = 0.01, .chi2_in = 0.05,
                     .n_bath1 = 10, .n_bath2 = 10};
  const auto cr = channel_rates(s, r);
  const double p[5] = {cr.detect / cr.total(), cr.loss1 / cr.total(), cr.loss2 / cr.total(),
                       cr.gain1 / cr.total(), cr.gain2 / cr.total()};
  int counts[5] = {};
  RngStream rng(99);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto ch = select_channel(s, r, rng.uniform());
    if (std::holds_alternative<Detect>(ch)) {
      ++counts[0];
    } else if (auto* l = std::get_if<Loss>(&ch)) {
      ++counts[l->trap == Trap::one ? 1 : 2];
    } else {
      ++counts[std::get<Gain>(ch).trap == Trap::one ? 3 : 4];
    }
  }
  for (int c = 0; c < 5; ++c) {
    const double se = std::sqrt(p[c] * (1 - p[c]) / n);
    EXPECT_NEAR(counts[c] / static_cast<double>(n), p[c], 3 * se) << "channel " << c;
  }
}

TEST(DetectionPhase, Examples) {
  EXPECT_EQ(sample_detection_phase(0.0, 1.3, 0.25), kTwoPi * 0.25);
  // The density vanishes at pi, so the CDF is flat to third order there:
  // the map is inverted to 1e-10 but phi itself is only pinned to ~1e-5.
  const double median = sample_detection_phase(1.0, 0.0, 0.5);
  EXPECT_NEAR((median + std::sin(median)) / kTwoPi, 0.5, 1e-10);
  EXPECT_NEAR(median, std::numbers::pi, 1e-4);
  EXPECT_GE(sample_detection_phase(0.3, 2.0, 0.0), 0.0);
  EXPECT_LT(sample_detection_phase(0.3, 2.0, 1.0 - 1e-17), kTwoPi);
}

TEST(DetectionPhase, HistogramPassesChiSquare) {
  const double beta = 0.8;
  const double theta = 1.0;
  auto cdf = [&](double x) { return (x + beta * (std::sin(x + theta) - std::sin(theta))) / kTwoPi; };
  const int bins = 50;
  const int n = 100000;
  std::vector<int> hist(bins);
  RngStream rng(2024);
  for (int i = 0; i < n; ++i) {
    const double phi = sample_detection_phase(beta, theta, rng.uniform());
    ++hist[std::min(bins - 1, static_cast<int>(phi / kTwoPi * bins))];
  }
  double chi2 = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double e = n * (cdf(kTwoPi * (b + 1) / bins) - cdf(kTwoPi * b / bins));
    chi2 += (hist[b] - e) * (hist[b] - e) / e;
  }
  EXPECT_LT(chi2, 74.92);  // 99th percentile of chi-square with 49 dof
}

TEST(StepTrajectory, DeterministicReplay) {
  const auto s = superposition(4, 5, -1, {0.3, 0.8, Complex(0.2, 0.3)});
  const RateConfig r{.kappa = 0.4, .nu2 = 0.3, .chi1_in = 0.1, .n_bath1 = 1};
  RngStream a(17), b(17);
  const auto x = step_trajectory(s, r, 0.0, a);
  const auto y = step_trajectory(s, r, 0.0, b);
  EXPECT_EQ(x.state, y.state);
  EXPECT_EQ(x.event, y.event);
}

TEST(StepTrajectory, PureDetectionEmptiesTwoAtoms) {
  auto s = new_number_state(1, 1);
  const RateConfig r{};
  RngStream rng(3);
  double t = 0.0;
  for (int i = 0; i < 2; ++i) {
    auto step = step_trajectory(s, r, t, rng);
    ASSERT_FALSE(step.halted());
    EXPECT_TRUE(std::holds_alternative<Detect>(step.event->channel));
    EXPECT_GT(step.event->t, t);
    t = step.event->t;
    s = step.state;
  }
  EXPECT_EQ(s.total_number(), 0);
  EXPECT_TRUE(step_trajectory(s, r, t, rng).halted());
}

TEST(StepTrajectory, MeanFirstJumpTime) {
  const auto s = new_number_state(100, 100);
  const RateConfig r{};
  RngStream rng(8);
  const int n = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = step_trajectory(s, r, 0.0, rng).event->t;
    sum += t;
    sum2 += t * t;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
  EXPECT_NEAR(mean, 1.0 / 200.0, 3 * se);
}

TEST(StepTrajectory, RenormalizesAfterJump) {
  const auto s = superposition(6, 6, -2, {0.2, 0.5, 0.7, 0.4, 0.1});
  const RateConfig r{.kappa = 0.5, .nu1 = 0.2};
  RngStream rng(5);
  const auto step = step_trajectory(s, r, 0.0, rng);
  EXPECT_NEAR(step.state.norm_sq(), 1.0, 1e-12);
  EXPECT_EQ(step.state.total_number(), 11);
}

TEST(PrepareByDetections, BuildsPhaseAndRemovesAtoms) {
  RngStream rng(1);
  const auto s = prepare_by_detections(new_number_state(50, 50), 20, rng);
  EXPECT_EQ(s.total_number(), 80);
  EXPECT_GT(observe(s).beta, 0.9);
  EXPECT_THROW(prepare_by_detections(new_number_state(1, 1), 3, rng), std::invalid_argument);
}

}  // namespace
}  // namespace twintrap
