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

#ifndef DPAUDIT_CANARY_H_
#define DPAUDIT_CANARY_H_

#include <optional>
#include <string>
#include <vector>

#include "dpaudit/nn.h"

namespace dpaudit {

enum class CanaryStrategy {
  kBlank,    // all-zero feature vector
  kClipBkd,  // least-singular-direction of the data matrix, times scale
  kFixed,    // caller-supplied feature vector
};

struct CanarySpec {
  CanaryStrategy strategy = CanaryStrategy::kBlank;
  // When unset: 0 for blank/fixed, the class the initial model least favors
  // for clipbkd.
  std::optional<int> label;
  double scale = 1.0;                  // feature magnitude for clipbkd
  std::vector<double> fixed_features;  // used by kFixed only
};

Sample MakeBlankCanary(int dim, int label);

// Features = v * scale where v is the unit right singular vector of the n x d
// feature matrix with the smallest singular value, sign fixed so the first
// nonzero entry is positive. Requires d >= 2 and a non-empty dataset.
Sample MakeClipBkdCanary(const Dataset& dataset, int label, double scale);

// The class with the smallest logit under (spec, params) at `features`;
// ties resolved to the smallest index.
int LeastFavoredLabel(const ModelSpec& spec, const ParamVector& params,
                      const std::vector<double>& features);

// Resolves a CanarySpec against the dataset and initial model. Validates that
// the crafted sample matches the model's input dimension and class count.
Sample CraftCanary(const CanarySpec& canary, const Dataset& dataset,
                   const ModelSpec& spec, const ParamVector& theta0);

std::string ToString(CanaryStrategy strategy);
CanaryStrategy CanaryStrategyFromString(const std::string& name);

}  // namespace dpaudit

#endif  // DPAUDIT_CANARY_H_
