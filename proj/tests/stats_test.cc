//
// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpaudit/stats.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gtest/gtest.h"
#include "dpaudit/rng.h"
#include "testing/oracles.h"

namespace dpaudit {
namespace {

TEST(StdNormalCdfTest, ZeroIsOneHalf) { EXPECT_DOUBLE_EQ(StdNormalCdf(0.0), 0.5); }

TEST(StdNormalCdfTest, MatchesQuadratureOracle) {
  // 0.975 quantile of the standard normal; value frozen from the quadrature
  // oracle.
  EXPECT_NEAR(StdNormalCdf(1.959964), 0.97500000090355760, 1e-12);
  for (double x : {-6.0, -3.3, -1.0, -0.2, 0.7, 2.5, 5.1}) {
    EXPECT_NEAR(StdNormalCdf(x), testing::QuadratureNormalCdf(x), 1e-12) << "x=" << x;
  }
}

TEST(StdNormalCdfTest, DeepTailBelowAsymptoticBound) {
  const double phi10 = std::exp(-50.0) * 0.39894228040143267794;
  const double tail = StdNormalCdf(-10.0);
  EXPECT_LT(tail, 1e-20);
  EXPECT_LT(tail, phi10 / 10.0);                  // Mills upper bound
  EXPECT_GT(tail, phi10 * 10.0 / (1.0 + 100.0));  // Mills lower bound
}

TEST(StdNormalCdfTest, StrictlyIncreasing) {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = 16.0 * rng.NextUnit() - 8.0;
    const double step = 1e-6 + rng.NextUnit();
    EXPECT_LT(StdNormalCdf(x), StdNormalCdf(x + step));
  }
}

TEST(StdNormalCdfTest, RejectsNonFinite) {
  EXPECT_THROW(StdNormalCdf(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
  EXPECT_THROW(StdNormalCdf(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST(StdNormalQuantileTest, MedianIsZero) { EXPECT_DOUBLE_EQ(StdNormalQuantile(0.5), 0.0); }

TEST(StdNormalQuantileTest, MatchesBisectionOracle) {
  EXPECT_NEAR(StdNormalQuantile(0.975), 1.9599639845400545, 1e-9);
  for (double p : {1e-8, 1e-4, 0.023, 0.31, 0.5, 0.77, 0.983, 1.0 - 1e-6}) {
    EXPECT_NEAR(StdNormalQuantile(p), testing::QuantileByBisection(p), 1e-9) << "p=" << p;
  }
}

TEST(StdNormalQuantileTest, RoundTripThroughCdf) {
  EXPECT_NEAR(StdNormalQuantile(StdNormalCdf(1.234)), 1.234, 1e-9);
  // Mutual inverses over p in [1e-10, 1 - 1e-10].
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const double p = 1e-10 + (1.0 - 2e-10) * rng.NextUnit();
    EXPECT_NEAR(StdNormalCdf(StdNormalQuantile(p)), p, 1e-10) << "p=" << p;
  }
  // Positive x beyond ~5 is excluded: there Phi(x) sits within a few ulp of
  // 1.0 and the round trip is limited by double spacing, not by the
  // implementations (the p-space loop above still covers that region).
  for (double x : {-6.3, -4.0, -0.5, 0.0, 1.5, 5.0}) {
    EXPECT_NEAR(StdNormalQuantile(StdNormalCdf(x)), x, 1e-9) << "x=" << x;
  }
}

TEST(StdNormalQuantileTest, SignalsInfiniteQuantileAtEndpoints) {
  EXPECT_EQ(StdNormalQuantile(0.0), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(StdNormalQuantile(1.0), std::numeric_limits<double>::infinity());
}

TEST(StdNormalQuantileTest, RejectsOutOfRange) {
  EXPECT_THROW(StdNormalQuantile(-0.1), std::domain_error);
  EXPECT_THROW(StdNormalQuantile(1.1), std::domain_error);
  EXPECT_THROW(StdNormalQuantile(std::numeric_limits<double>::quiet_NaN()),
               std::domain_error);
}

TEST(ClopperPearsonTest, AllSuccessesGiveOne) {
  EXPECT_DOUBLE_EQ(ClopperPearsonUpper({7, 7}, 0.95), 1.0);
  EXPECT_DOUBLE_EQ(ClopperPearsonUpper({1, 1}, 0.5), 1.0);
}

TEST(ClopperPearsonTest, ZeroSuccessesMatchClosedForm) {
  // 1 - 0.05^(1/100), frozen from the closed form.
  EXPECT_NEAR(ClopperPearsonUpper({0, 100}, 0.95), 0.029513049607039934, 1e-10);
  for (int64_t n : {1, 10, 250, 5000}) {
    EXPECT_NEAR(ClopperPearsonUpper({0, n}, 0.975),
                testing::CpUpperZeroSuccesses(n, 0.975), 1e-10)
        << "n=" << n;
  }
}

TEST(ClopperPearsonTest, MatchesSummationCdfOracle) {
  // Root of BinomCDF(10; 100, u) = 0.025, frozen from the summation oracle.
  EXPECT_NEAR(ClopperPearsonUpper({10, 100}, 0.975), 0.17622259774002268, 1e-9);
  const struct {
    int64_t k;
    int64_t n;
    double level;
  } cases[] = {{1, 3, 0.9}, {5, 50, 0.975}, {25, 50, 0.95}, {120, 200, 0.99},
               {999, 1000, 0.975}, {42, 5000, 0.975}};
  for (const auto& c : cases) {
    EXPECT_NEAR(ClopperPearsonUpper({c.k, c.n}, c.level),
                testing::CpUpperByBisection(c.k, c.n, c.level), 1e-9)
        << "k=" << c.k << " n=" << c.n;
  }
}

TEST(ClopperPearsonTest, DefiningEquationHolds) {
  const double u = ClopperPearsonUpper({10, 100}, 0.975);
  EXPECT_NEAR(testing::BinomialCdfBySummation(10, 100, u), 0.025, 1e-9);
  EXPECT_GE(u, 0.10);  // u >= successes / trials
}

TEST(ClopperPearsonTest, MonotoneInSuccessesAndConfidence) {
  for (int64_t k = 0; k < 50; ++k) {
    EXPECT_LE(ClopperPearsonUpper({k, 50}, 0.95), ClopperPearsonUpper({k + 1, 50}, 0.95));
    EXPECT_LE(ClopperPearsonUpper({k, 50}, 0.9), ClopperPearsonUpper({k, 50}, 0.99));
    EXPECT_GE(ClopperPearsonUpper({k, 50}, 0.95), static_cast<double>(k) / 50.0);
  }
}

TEST(ClopperPearsonTest, RejectsInvalidArguments) {
  EXPECT_THROW(ClopperPearsonUpper({3, 2}, 0.95), std::invalid_argument);
  EXPECT_THROW(ClopperPearsonUpper({-1, 2}, 0.95), std::invalid_argument);
  EXPECT_THROW(ClopperPearsonUpper({0, 0}, 0.95), std::invalid_argument);
  EXPECT_THROW(ClopperPearsonUpper({1, 2}, 0.0), std::invalid_argument);
  EXPECT_THROW(ClopperPearsonUpper({1, 2}, 1.0), std::invalid_argument);
}

// Coverage: over simulated binomial draws at a known rate, the upper bound
// covers the truth at least `confidence` of the time, within 3 standard
// errors of the simulation itself.
TEST(ClopperPearsonTest, CoverageSimulation) {
  const double confidence = 0.95;
  const int64_t n = 100;
  const int draws = 1500;
  Rng rng(20260809);
  for (double p : {0.01, 0.1, 0.5}) {
    int covered = 0;
    for (int d = 0; d < draws; ++d) {
      int64_t successes = 0;
      for (int64_t t = 0; t < n; ++t) {
        if (rng.NextUnit() < p) ++successes;
      }
      if (ClopperPearsonUpper({successes, n}, confidence) >= p) ++covered;
    }
    const double coverage = static_cast<double>(covered) / draws;
    const double se = std::sqrt(confidence * (1.0 - confidence) / draws);
    EXPECT_GE(coverage, confidence - 3.0 * se) << "p=" << p;
  }
}

}  // namespace
}  // namespace dpaudit
