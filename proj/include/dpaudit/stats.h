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

#ifndef DPAUDIT_STATS_H_
#define DPAUDIT_STATS_H_

#include <cstdint>

namespace dpaudit {

// Outcome counts of repeated binary decisions (attack false positives or
// false negatives over R runs). successes must not exceed trials.
struct BinomialCount {
  int64_t successes = 0;
  int64_t trials = 0;
};

// Standard normal CDF, accurate to better than 1e-14 absolute everywhere.
// Throws std::domain_error on non-finite input.
double StdNormalCdf(double x);

// Standard normal quantile. Returns -infinity at p = 0 and +infinity at
// p = 1 so the caller decides how to clamp; throws std::domain_error outside
// [0, 1]. Accuracy: |StdNormalCdf(StdNormalQuantile(p)) - p| <= 1e-10.
double StdNormalQuantile(double p);

// One-sided Clopper-Pearson upper confidence bound: the rate u such that
// BinomialCdf(successes; trials, u) == 1 - confidence. Returns 1 exactly when
// successes == trials. confidence must lie in (0, 1).
double ClopperPearsonUpper(const BinomialCount& count, double confidence);

}  // namespace dpaudit

#endif  // DPAUDIT_STATS_H_
