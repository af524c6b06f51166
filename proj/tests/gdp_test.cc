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

#include "dpaudit/gdp.h"

#include <cmath>
#include <stdexcept>

#include "gtest/gtest.h"
#include "dpaudit/errors.h"
#include "testing/oracles.h"

namespace dpaudit {
namespace {

TEST(DeltaForEpsilonTest, AtZeroEpsilonCollapsesToCentralMass) {
  // delta(0) = Phi(mu/2) - Phi(-mu/2) = 2 Phi(mu/2) - 1; value frozen for
  // mu = 1.
  EXPECT_NEAR(DeltaForEpsilon(1.0, 0.0), 0.38292492254802621, 1e-12);
}

TEST(DeltaForEpsilonTest, ZeroMuIsPerfectPrivacy) {
  EXPECT_DOUBLE_EQ(DeltaForEpsilon(0.0, 5.0), 0.0);
  EXPECT_DOUBLE_EQ(DeltaForEpsilon(0.0, 0.0), 0.0);
}

TEST(DeltaForEpsilonTest, FarTailVanishes) {
  const double d = DeltaForEpsilon(1.0, 30.0);
  EXPECT_GE(d, 0.0);
  EXPECT_LT(d, 1e-100);
}

TEST(DeltaForEpsilonTest, MatchesDirectFormula) {
  for (double mu : {0.3, 1.0, 2.0, 4.5}) {
    for (double eps : {0.0, 0.5, 1.0, 3.0, 8.0}) {
      EXPECT_NEAR(DeltaForEpsilon(mu, eps), testing::GdpDeltaOracle(mu, eps), 1e-12)
          << "mu=" << mu << " eps=" << eps;
    }
  }
}

TEST(DeltaForEpsilonTest, MonotoneOnGrid) {
  // Strictly decreasing in eps and increasing in mu wherever the value has
  // not underflowed to zero.
  for (double mu = 0.1; mu <= 5.0; mu += 0.35) {
    for (double eps = 0.0; eps < 20.0; eps += 1.0) {
      const double d1 = DeltaForEpsilon(mu, eps);
      const double d2 = DeltaForEpsilon(mu, eps + 1.0);
      if (d1 > 1e-250) {
        EXPECT_GT(d1, d2) << "mu=" << mu << " eps=" << eps;
      } else {
        EXPECT_LE(d2, d1);
      }
    }
  }
  for (double eps : {0.0, 1.0, 5.0, 12.0}) {
    for (double mu = 0.1; mu + 0.35 <= 5.0; mu += 0.35) {
      const double d1 = DeltaForEpsilon(mu, eps);
      const double d2 = DeltaForEpsilon(mu + 0.35, eps);
      if (d2 > 1e-250) {
        EXPECT_LT(d1, d2) << "mu=" << mu << " eps=" << eps;
      }
    }
  }
}

TEST(EpsilonForDeltaTest, RoundTripsThroughDelta) {
  const double delta = DeltaForEpsilon(2.0, 3.0);
  EXPECT_NEAR(EpsilonForDelta(2.0, delta), 3.0, 1e-6);
}

TEST(EpsilonForDeltaTest, ZeroWhenAlreadySatisfied) {
  // Small mu: delta(0) = 2 Phi(mu/2) - 1 < 0.5, so eps = 0 suffices.
  EXPECT_DOUBLE_EQ(EpsilonForDelta(0.1, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(EpsilonForDelta(0.0, 0.2), 0.0);
}

TEST(EpsilonForDeltaTest, MatchesIndependentRootFinder) {
  // mu fixed so that eps = 10 at delta = 1e-5; frozen from the oracle
  // bisection.
  const double mu = 2.0004456204306324;
  EXPECT_NEAR(EpsilonForDelta(mu, 1e-5), 10.0, 1e-6);
  for (double m : {0.5, 1.0, 3.5929}) {
    EXPECT_NEAR(EpsilonForDelta(m, 1e-5), testing::GdpEpsilonOracle(m, 1e-5), 1e-8)
        << "mu=" << m;
  }
}

TEST(EpsilonForDeltaTest, AchievedDeltaWithinTolerance) {
  for (double mu : {0.4, 1.7, 3.0}) {
    const double eps = EpsilonForDelta(mu, 1e-5);
    EXPECT_NEAR(DeltaForEpsilon(mu, eps), 1e-5, 1e-9);
  }
}

TEST(EpsilonForDeltaTest, SignalsOutOfRange) {
  // mu = 50 needs eps far past the audit scale at delta = 1e-12.
  EXPECT_THROW(EpsilonForDelta(50.0, 1e-12), BudgetOutOfRangeError);
}

TEST(ComposeMuTest, KnownValues) {
  EXPECT_DOUBLE_EQ(ComposeMu(10.0, 100), 1.0);
  EXPECT_DOUBLE_EQ(ComposeMu(1.0, 1), 1.0);
  EXPECT_NEAR(ComposeMu(2.0, 8), std::sqrt(8.0) / 2.0, 0.0);
}

TEST(ComposeMuTest, QuadruplingStepsDoublesMuExactly) {
  for (int64_t steps : {1, 7, 25, 100}) {
    for (double sigma : {0.5, 2.0, 9.7}) {
      EXPECT_EQ(ComposeMu(sigma, 4 * steps), 2.0 * ComposeMu(sigma, steps));
    }
  }
}

TEST(ComposeMuTest, RejectsInvalid) {
  EXPECT_THROW(ComposeMu(0.0, 10), std::invalid_argument);
  EXPECT_THROW(ComposeMu(1.0, 0), std::invalid_argument);
}

TEST(CalibrateSigmaTest, RoundTripOnExperimentGrid) {
  for (double eps : {1.0, 2.0, 4.0, 10.0}) {
    for (int64_t steps : {1, 25, 100, 200}) {
      const double sigma = CalibrateSigma({eps, 1e-5}, steps);
      const double achieved = EpsilonForDelta(ComposeMu(sigma, steps), 1e-5);
      EXPECT_NEAR(achieved, eps, 1e-3 * eps) << "eps=" << eps << " T=" << steps;
    }
  }
}

TEST(CalibrateSigmaTest, SingleStepMatchesDirectMuCalibration) {
  // For T = 1, sigma is exactly 1/mu* where mu* solves delta(eps) = delta.
  const double sigma = CalibrateSigma({1.0, 1e-5}, 1);
  const double mu_star = testing::InvertIncreasing(
      [](double m) { return testing::GdpDeltaOracle(m, 1.0); }, 1e-5, 1e-3, 10.0);
  EXPECT_NEAR(sigma, 1.0 / mu_star, 1e-4 * sigma);
  EXPECT_NEAR(sigma, 3.7306316348159418, 1e-3);  // frozen from the oracle
}

TEST(CalibrateSigmaTest, MorePrivacyNeedsMoreNoise) {
  const double sigma_tight = CalibrateSigma({1.0, 1e-5}, 100);
  const double sigma_loose = CalibrateSigma({10.0, 1e-5}, 100);
  EXPECT_GT(sigma_tight, sigma_loose);
}

TEST(CalibrateSigmaTest, UnreachableTargetFails) {
  EXPECT_THROW(CalibrateSigma({200.0, 1e-5}, 1), CalibrationError);
  EXPECT_THROW(CalibrateSigma({0.0, 1e-5}, 1), std::invalid_argument);
}

}  // namespace
}  // namespace dpaudit
