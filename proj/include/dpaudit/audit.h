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

#ifndef DPAUDIT_AUDIT_H_
#define DPAUDIT_AUDIT_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dpaudit/canary.h"
#include "dpaudit/dpsgd.h"
#include "dpaudit/nn.h"
#include "dpaudit/stats.h"

namespace dpaudit {

enum class InitKind { kAverage, kWorst };

struct PretrainRecipe {
  int epochs = 5;
  int batch_size = 32;
  double learning_rate = 0.01;
};

struct InitStrategy {
  InitKind kind = InitKind::kAverage;
  PretrainRecipe recipe;  // used when kind == kWorst
};

struct AuditConfig {
  int64_t runs_per_world = 1;  // R
  double confidence = 0.95;    // joint level for the (FPR, FNR) bounds
  double delta = 1e-5;
  CanarySpec canary;
  InitStrategy init;
  HyperParams hyper;  // batch_size is overridden per world with |dataset|
  ModelSpec model;
  // Select the threshold on one half of the runs and estimate on the other.
  // Off by default: common practice sweeps the full observation set.
  bool holdout = false;
  // When false, D' = D and the canary only serves as the loss probe. Used by
  // soundness checks; a real audit keeps this on.
  bool include_canary = true;
  // Drop diverged runs instead of failing the audit. Off by default since
  // silently dropping runs biases the rate estimates.
  bool drop_diverged = false;
  int workers = 0;  // 0 = hardware concurrency
};

struct RunRecord {
  int world = 0;  // 0 = without target, 1 = with target
  int64_t index = 0;
  uint64_t seed = 0;
  double canary_loss = 0.0;
  double train_accuracy = 0.0;
  bool diverged = false;
};

// Canary losses observed at theta_T, one entry per completed run and world.
struct ObservationSet {
  std::vector<double> without_target;  // O
  std::vector<double> with_target;     // O'
  std::vector<RunRecord> runs;
};

struct RateCounts {
  BinomialCount false_positives;  // #{o in O : o >= tau} over |O|
  BinomialCount false_negatives;  // #{o in O' : o < tau} over |O'|
};

struct EpsEstimate {
  double fpr_upper = 1.0;
  double fnr_upper = 1.0;
  double mu_emp = 0.0;
  double epsilon_emp = 0.0;
};

struct AuditReport {
  int64_t runs_without = 0;
  int64_t runs_with = 0;
  int64_t fp_count = 0;  // counts for the reported decision direction
  int64_t fn_count = 0;
  double fpr = 0.0;
  double fnr = 0.0;
  double fpr_upper = 1.0;
  double fnr_upper = 1.0;
  double mu_emp = 0.0;
  double epsilon_emp = 0.0;
  double threshold = 0.0;  // tau*; -inf when no threshold distinguishes
  bool flipped = false;    // decision direction that achieved the maximum
  bool holdout = false;
  double confidence = 0.95;
  double delta = 1e-5;
  double mean_train_accuracy = 0.0;
  std::vector<RunRecord> runs;
};

// Runs 2R independent DP-SGD trainings (R per world, all from theta0), with
// run (world, r) seeded by DeriveSeed(master_seed, world, r), and records the
// canary loss of each final model. Training runs are dispatched across a
// worker pool; results are ordered by run index, not completion order.
ObservationSet CollectObservations(const AuditConfig& config,
                                   const Dataset& private_data,
                                   const ParamVector& theta0,
                                   uint64_t master_seed);

RateCounts RatesAtThreshold(const ObservationSet& obs, double tau);

// Clopper-Pearson upper bounds at level 1 - (1 - confidence)/2 each (union
// bound, so the joint statement holds with probability >= confidence), then
//   mu_emp = max(0, Quantile(1 - FPR_upper) - Quantile(FNR_upper))
// and epsilon_emp via the GDP conversion at `delta` (0 when mu_emp = 0).
EpsEstimate EstimateEps(const BinomialCount& fp, const BinomialCount& fn,
                        double confidence, double delta);

// Sweeps candidate thresholds (midpoints of consecutive distinct observed
// values plus +-infinity sentinels), tries both decision directions, and
// returns the report with maximal epsilon_emp. Ties break toward the smallest
// threshold, unflipped first. With config.holdout, the threshold is selected
// on the first half of each world's runs and the estimate comes from the
// second half.
AuditReport BestThresholdEps(const ObservationSet& obs, const AuditConfig& config);

// One JSON object per line; infinities are encoded as strings.
std::string ReportToJsonLine(const AuditReport& report);

// world,run,seed,loss,train_accuracy rows.
void WriteObservationsCsv(std::ostream& out, const ObservationSet& obs);

std::string ToString(InitKind kind);
InitKind InitKindFromString(const std::string& name);

}  // namespace dpaudit

#endif  // DPAUDIT_AUDIT_H_
