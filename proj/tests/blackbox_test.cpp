/*
 * Copyright 2026 The vflp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "vflp/blackbox.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

namespace vflp {
namespace {

Vector V(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

TEST(Case1Test, Examples) {
  EXPECT_LE(max_abs(bb_case1(V({0.2, 0.5, 1.0})).x - V({0.2, 0.5, 1.0})), 1e-15);
  EXPECT_LE(max_abs(bb_case1(V({0.4, 1.0, 2.0})).x - V({0.2, 0.5, 1.0})), 1e-15);
  EXPECT_LE(max_abs(bb_case1(V({-0.5, -1.0})).x - V({0.5, 1.0})), 1e-15);
  EXPECT_THROW(bb_case1(V({0.0, 0.0})), InvalidArgument);
  EXPECT_THROW(bb_case1(Vector()), InvalidArgument);
}

TEST(Case1Test, ErrorBoundedByMaxGap) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const Vector x = testing::random_uniform(rng, 20);
    const BlackboxEstimate e = bb_case1(1.7 * x);
    Index m = 0;
    x.maxCoeff(&m);
    // Per-sample error is at most (x_M - 1)^2.
    for (Index i = 0; i < x.size(); ++i) EXPECT_LE(std::pow(e.x(i) - x(i), 2), std::pow(x(m) - 1.0, 2) + 1e-15);
  }
}

TEST(Case2Test, Examples) {
  EXPECT_LE(max_abs(bb_case2(V({1.0, 1.5, 2.0})).x - V({0.0, 0.5, 1.0})), 1e-15);
  const BlackboxEstimate one = bb_case2(V({3.2}));
  EXPECT_EQ(one.x, V({0.0}));
  EXPECT_TRUE(one.degenerate);
  // Negative same-sign setting.
  EXPECT_LE(max_abs(bb_case2(V({-1.0, -1.5, -2.0})).x - V({0.0, 0.5, 1.0})), 1e-15);
}

TEST(Case2Test, MatchesRatioFormula) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const Vector x = testing::random_uniform(rng, 1 + t % 30);
    const double omega = 0.1 + 3.0 * testing::random_uniform(rng, 1)(0);
    const double b = 0.1 + 3.0 * testing::random_uniform(rng, 1)(0);
    const Vector v = (omega * x).array() + b;
    EXPECT_LE(max_abs(bb_case2(v).x - bb_case2_ratio_form(v)), 1e-12);
  }
}

TEST(Case2Test, ErrorBound) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const Vector x = testing::random_uniform(rng, 15);
    const Vector v = (0.98916 * x).array() + 3.048751;
    const BlackboxEstimate e = bb_case2(v);
    const double bound = std::pow(x.maxCoeff() - 1.0, 2) + std::pow(x.minCoeff(), 2);
    EXPECT_LE((e.x - x).squaredNorm() / 15.0, bound + 1e-12);
  }
}

TEST(Case3Test, Examples) {
  const BlackboxEstimate mixed = bb_case3(V({-1.0, 1.0}));
  EXPECT_TRUE(mixed.undecidable);
  EXPECT_EQ(mixed.x, V({0.5, 0.5}));
  // All positive: b > 0 so omega < 0, larger v means smaller x.
  const BlackboxEstimate pos = bb_case3(V({3.0, 2.5, 2.0}));
  EXPECT_FALSE(pos.undecidable);
  EXPECT_EQ(pos.omega_sign, -1);
  EXPECT_LE(max_abs(pos.x - V({0.0, 0.5, 1.0})), 1e-15);
  const BlackboxEstimate neg = bb_case3(V({-3.0, -2.5, -2.0}));
  EXPECT_EQ(neg.omega_sign, 1);
  EXPECT_LE(max_abs(neg.x - V({0.0, 0.5, 1.0})), 1e-15);
}

TEST(Case3Test, ConvergesOnSyntheticOppositeSigns) {
  std::mt19937_64 rng(4);
  for (double omega : {-0.8, 0.8}) {
    const double b = omega < 0 ? 2.0 : -2.0;  // every v shares the sign of b
    const Vector x = testing::random_uniform(rng, 2000);
    const BlackboxEstimate e = bb_case3((omega * x).array() + b);
    EXPECT_LT((e.x - x).squaredNorm() / 2000.0, 1e-4);
  }
}

TEST(Case3Test, PopulationMeanPicksOrientation) {
  std::mt19937_64 rng(5);
  // x skewed toward 0, omega > 0 and b < 0 with mixed-sign observations.
  Vector x = testing::random_uniform(rng, 500).cwiseAbs2();
  const Vector v = (2.0 * x).array() - 0.5;
  ASSERT_LT(v.minCoeff(), 0.0);
  ASSERT_GT(v.maxCoeff(), 0.0);
  const BlackboxEstimate e = bb_case3(v, 1.0 / 3.0);
  EXPECT_EQ(e.omega_sign, 1);
  EXPECT_LT((e.x - x).squaredNorm() / 500.0, 1e-3);
}

TEST(BlackboxPropertiesTest, EstimatesInUnitInterval) {
  std::mt19937_64 rng(6);
  for (int c = 1; c <= 3; ++c) {
    const BlackboxSimulation sim = default_simulation(c);
    for (int t = 0; t < 50; ++t) {
      const Vector x = testing::random_uniform(rng, 1 + t);
      const BlackboxEstimate e = bb_estimate(sim.knowledge, (sim.omega * x).array() + sim.b);
      EXPECT_GE(e.x.minCoeff(), -1e-15);
      EXPECT_LE(e.x.maxCoeff(), 1.0 + 1e-15);
    }
  }
}

TEST(BlackboxPropertiesTest, ExtremesConvergeForUniformSamples) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double gap_max = 0.0, gap_min = 0.0;
  for (int t = 0; t < 100; ++t) {
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double x = u(rng);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    gap_max += 1.0 - hi;
    gap_min += lo;
  }
  EXPECT_LT(gap_max / 100, 0.02);
  EXPECT_LT(gap_min / 100, 0.02);
}

TEST(BlackboxPropertiesTest, MeanMseFallsWithN) {
  for (int c : {1, 2}) {
    const BlackboxSimulation sim = default_simulation(c);
    std::mt19937_64 rng(8);
    const double small = blackbox_mean_mse(sim, 5, 200, rng);
    const double mid = blackbox_mean_mse(sim, 50, 200, rng);
    const double big = blackbox_mean_mse(sim, 1000, 100, rng);
    EXPECT_GT(small, mid);
    EXPECT_GT(mid, big);
    EXPECT_LT(big, 1e-3);
  }
  EXPECT_THROW(default_simulation(4), ConfigError);
}

}  // namespace
}  // namespace vflp
