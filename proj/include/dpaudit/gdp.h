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

#ifndef DPAUDIT_GDP_H_
#define DPAUDIT_GDP_H_

#include <cstdint>

namespace dpaudit {

struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
};

// Upper end of the epsilon search bracket. Audits never get close to it; a
// budget past this point is reported as out of range rather than chased.
inline constexpr double kMaxAuditEpsilon = 100.0;

// delta(epsilon) for a mu-GDP mechanism:
//   delta = Phi(-eps/mu + mu/2) - e^eps * Phi(-eps/mu - mu/2).
// mu = 0 is the perfect-privacy limit and yields 0 for every epsilon.
// Strictly decreasing in epsilon and increasing in mu (until the result
// underflows to 0).
double DeltaForEpsilon(double mu, double epsilon);

// Inverse of DeltaForEpsilon in epsilon: the unique eps >= 0 with
// delta(eps) = delta, found by bisection over [0, kMaxAuditEpsilon]. Returns 0
// when even eps = 0 already satisfies the target. Throws
// BudgetOutOfRangeError when no root exists below kMaxAuditEpsilon.
double EpsilonForDelta(double mu, double delta);

// GDP composition of `steps` full-batch Gaussian mechanism invocations with
// noise multiplier sigma: mu = sqrt(steps) / sigma. The clipping norm does not
// appear because the noise is specified as C * sigma, so the sensitivity C
// cancels.
double ComposeMu(double sigma, int64_t steps);

// Smallest noise multiplier whose composed budget meets `target` over `steps`
// iterations, to 1e-4 relative accuracy in epsilon. Bisection over
// sigma in [1e-3, 1e6]; throws CalibrationError when the target is not
// reachable inside that bracket.
double CalibrateSigma(const PrivacyBudget& target, int64_t steps);

}  // namespace dpaudit

#endif  // DPAUDIT_GDP_H_
