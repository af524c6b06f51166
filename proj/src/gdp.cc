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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dpaudit/errors.h"
#include "dpaudit/stats.h"

namespace dpaudit {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// log Phi(x). erfc keeps full relative precision until it underflows around
// x = -37.5; past that the first-order Mills asymptotic takes over.
double LogStdNormalCdf(double x) {
  if (x > -37.0) {
    return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  }
  const double x2 = x * x;
  return -0.5 * x2 - kLogSqrt2Pi - std::log(-x) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

}  // namespace

double DeltaForEpsilon(double mu, double epsilon) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw std::invalid_argument("DeltaForEpsilon: mu must be finite and >= 0");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("DeltaForEpsilon: epsilon must be finite and >= 0");
  }
  if (mu == 0.0) return 0.0;
  const double first = StdNormalCdf(-epsilon / mu + mu / 2.0);
  // The second term e^eps * Phi(.) is evaluated in log space so that a huge
  // epsilon times an underflowing tail stays 0 instead of inf * 0.
  const double second = std::exp(epsilon + LogStdNormalCdf(-epsilon / mu - mu / 2.0));
  return std::clamp(first - second, 0.0, 1.0);
}

double EpsilonForDelta(double mu, double delta) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw std::invalid_argument("EpsilonForDelta: mu must be finite and >= 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("EpsilonForDelta: delta outside (0, 1)");
  }
  if (mu == 0.0) return 0.0;
  if (DeltaForEpsilon(mu, 0.0) <= delta) return 0.0;
  double lo = 0.0;
  double hi = kMaxAuditEpsilon;
  if (DeltaForEpsilon(mu, hi) > delta) {
    throw BudgetOutOfRangeError(
        "EpsilonForDelta: no epsilon below " + std::to_string(kMaxAuditEpsilon) +
        " reaches delta = " + std::to_string(delta) + " at mu = " + std::to_string(mu));
  }
  while (hi - lo > 1e-11) {
    const double mid = 0.5 * (lo + hi);
    if (DeltaForEpsilon(mu, mid) > delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double ComposeMu(double sigma, int64_t steps) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("ComposeMu: sigma must be finite and > 0");
  }
  if (steps < 1) {
    throw std::invalid_argument("ComposeMu: steps must be >= 1");
  }
  return std::sqrt(static_cast<double>(steps)) / sigma;
}

double CalibrateSigma(const PrivacyBudget& target, int64_t steps) {
  if (!(target.epsilon > 0.0) || !std::isfinite(target.epsilon)) {
    throw std::invalid_argument("CalibrateSigma: target epsilon must be > 0");
  }
  if (!(target.delta > 0.0 && target.delta < 1.0)) {
    throw std::invalid_argument("CalibrateSigma: target delta outside (0, 1)");
  }
  if (steps < 1) {
    throw std::invalid_argument("CalibrateSigma: steps must be >= 1");
  }
  const auto epsilon_at = [&](double sigma) {
    try {
      return EpsilonForDelta(ComposeMu(sigma, steps), target.delta);
    } catch (const BudgetOutOfRangeError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double lo = 1e-3;
  double hi = 1e6;
  if (epsilon_at(lo) < target.epsilon || epsilon_at(hi) > target.epsilon) {
    throw CalibrationError(
        "CalibrateSigma: epsilon = " + std::to_string(target.epsilon) +
        " not reachable with sigma in [1e-3, 1e6] over " + std::to_string(steps) +
        " steps");
  }
  // epsilon_at is decreasing in sigma.
  while (hi - lo > 1e-9 * lo) {
    const double mid = 0.5 * (lo + hi);
    if (epsilon_at(mid) > target.epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double sigma = 0.5 * (lo + hi);
  const double achieved = epsilon_at(sigma);
  if (std::abs(achieved - target.epsilon) > 1e-4 * target.epsilon) {
    throw CalibrationError("CalibrateSigma: bisection failed to converge");
  }
  return sigma;
}

}  // namespace dpaudit
