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

#include "dpaudit/audit.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "dpaudit/errors.h"
#include "dpaudit/gdp.h"
#include "dpaudit/rng.h"

namespace dpaudit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void ValidateAuditConfig(const AuditConfig& config) {
  if (config.runs_per_world < 1) {
    throw std::invalid_argument("AuditConfig: runs_per_world must be >= 1");
  }
  if (!(config.confidence > 0.0 && config.confidence < 1.0)) {
    throw std::invalid_argument("AuditConfig: confidence outside (0, 1)");
  }
  if (!(config.delta > 0.0 && config.delta < 1.0)) {
    throw std::invalid_argument("AuditConfig: delta outside (0, 1)");
  }
  ValidateModelSpec(config.model);
  if (config.hyper.iterations < 1 || !(config.hyper.learning_rate > 0.0) ||
      !(config.hyper.clip_norm > 0.0) || !(config.hyper.noise_multiplier >= 0.0)) {
    throw std::invalid_argument("AuditConfig: invalid hyper-parameters");
  }
}

EpsEstimate EstimateFromUppers(double fpr_upper, double fnr_upper, double delta) {
  EpsEstimate est;
  est.fpr_upper = fpr_upper;
  est.fnr_upper = fnr_upper;
  // An upper bound of 1 sends the corresponding quantile to -inf: no evidence.
  const double mu = StdNormalQuantile(1.0 - fpr_upper) - StdNormalQuantile(fnr_upper);
  est.mu_emp = (std::isfinite(mu) && mu > 0.0) ? mu : 0.0;
  est.epsilon_emp = est.mu_emp > 0.0 ? EpsilonForDelta(est.mu_emp, delta) : 0.0;
  return est;
}

// Memoizes Clopper-Pearson bounds across the threshold sweep; with R runs the
// sweep revisits every count in [0, R] many times.
class CpCache {
 public:
  explicit CpCache(double level) : level_(level) {}
  double Upper(const BinomialCount& count) {
    const auto key = std::make_pair(count.successes, count.trials);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const double value = ClopperPearsonUpper(count, level_);
    cache_.emplace(key, value);
    return value;
  }

 private:
  double level_;
  std::map<std::pair<int64_t, int64_t>, double> cache_;
};

struct SweepChoice {
  double tau = -kInf;
  bool flipped = false;
  BinomialCount fp;
  BinomialCount fn;
  EpsEstimate est;
  bool valid = false;
};

std::vector<double> ThresholdCandidates(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> candidates;
  candidates.reserve(values.size() + 1);
  candidates.push_back(-kInf);
  for (size_t i = 0; i + 1 < values.size(); ++i) {
    candidates.push_back(values[i] + (values[i + 1] - values[i]) / 2.0);
  }
  candidates.push_back(kInf);
  return candidates;
}

// Maximizes epsilon_emp over thresholds and decision directions. Candidates
// are visited in increasing tau order, unflipped before flipped, and only a
// strictly larger epsilon replaces the incumbent, so ties resolve to the
// smallest threshold.
SweepChoice SweepBest(const std::vector<double>& without,
                      const std::vector<double>& with, double confidence,
                      double delta) {
  std::vector<double> o_sorted = without;
  std::vector<double> p_sorted = with;
  std::sort(o_sorted.begin(), o_sorted.end());
  std::sort(p_sorted.begin(), p_sorted.end());
  const int64_t r0 = static_cast<int64_t>(o_sorted.size());
  const int64_t r1 = static_cast<int64_t>(p_sorted.size());

  std::vector<double> all = without;
  all.insert(all.end(), with.begin(), with.end());
  const std::vector<double> candidates = ThresholdCandidates(std::move(all));

  CpCache cache(1.0 - (1.0 - confidence) / 2.0);
  SweepChoice best;
  for (const double tau : candidates) {
    const int64_t fp = r0 - (std::lower_bound(o_sorted.begin(), o_sorted.end(), tau) -
                             o_sorted.begin());
    const int64_t fn =
        std::lower_bound(p_sorted.begin(), p_sorted.end(), tau) - p_sorted.begin();
    for (const bool flip : {false, true}) {
      const BinomialCount fp_count{flip ? r0 - fp : fp, r0};
      const BinomialCount fn_count{flip ? r1 - fn : fn, r1};
      EpsEstimate est = EstimateFromUppers(cache.Upper(fp_count),
                                           cache.Upper(fn_count), delta);
      if (!best.valid || est.epsilon_emp > best.est.epsilon_emp) {
        best = SweepChoice{tau, flip, fp_count, fn_count, est, true};
      }
    }
  }
  return best;
}

AuditReport ReportFromChoice(const SweepChoice& choice, const AuditConfig& config) {
  AuditReport report;
  report.runs_without = choice.fp.trials;
  report.runs_with = choice.fn.trials;
  report.fp_count = choice.fp.successes;
  report.fn_count = choice.fn.successes;
  report.fpr = static_cast<double>(choice.fp.successes) / choice.fp.trials;
  report.fnr = static_cast<double>(choice.fn.successes) / choice.fn.trials;
  report.fpr_upper = choice.est.fpr_upper;
  report.fnr_upper = choice.est.fnr_upper;
  report.mu_emp = choice.est.mu_emp;
  report.epsilon_emp = choice.est.epsilon_emp;
  report.threshold = choice.tau;
  report.flipped = choice.flipped;
  report.holdout = config.holdout;
  report.confidence = config.confidence;
  report.delta = config.delta;
  return report;
}

}  // namespace

ObservationSet CollectObservations(const AuditConfig& config,
                                   const Dataset& private_data,
                                   const ParamVector& theta0,
                                   uint64_t master_seed) {
  ValidateAuditConfig(config);
  if (private_data.samples.empty()) {
    throw std::invalid_argument("CollectObservations: empty private dataset");
  }
  if (private_data.dimension() != config.model.input_dim()) {
    throw std::invalid_argument(
        "CollectObservations: dataset dimension does not match model input");
  }
  if (private_data.num_classes != config.model.num_classes()) {
    throw std::invalid_argument(
        "CollectObservations: dataset classes do not match model output");
  }
  if (theta0.size() != ParamCount(config.model)) {
    throw std::invalid_argument("CollectObservations: theta0 does not match model");
  }

  const Sample canary = CraftCanary(config.canary, private_data, config.model, theta0);
  Dataset with_target = private_data;
  if (config.include_canary) {
    with_target.samples.push_back(canary);
  }

  const int64_t runs_per_world = config.runs_per_world;
  const int64_t total = 2 * runs_per_world;
  std::vector<RunRecord> records(total);
  std::vector<std::exception_ptr> failures(total);
  std::atomic<int64_t> next{0};

  const auto worker = [&]() {
    for (;;) {
      const int64_t i = next.fetch_add(1);
      if (i >= total) return;
      const int world = i < runs_per_world ? 0 : 1;
      const int64_t run = world == 0 ? i : i - runs_per_world;
      RunRecord record;
      record.world = world;
      record.index = run;
      record.seed = DeriveSeed(master_seed, static_cast<uint64_t>(world),
                               static_cast<uint64_t>(run));
      try {
        const Dataset& dataset = world == 0 ? private_data : with_target;
        HyperParams hp = config.hyper;
        hp.batch_size = dataset.size();
        const ParamVector theta = DpsgdTrain(dataset, config.model, theta0, hp, record.seed);
        record.canary_loss = ForwardLoss(config.model, theta, canary);
        record.train_accuracy = Accuracy(config.model, theta, dataset);
      } catch (...) {
        failures[i] = std::current_exception();
        record.diverged = true;
      }
      records[i] = record;
    }
  };

  int workers = config.workers > 0
                    ? config.workers
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<int64_t>(workers, total));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  for (int64_t i = 0; i < total; ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const DivergenceError&) {
      if (!config.drop_diverged) throw;
      // Recorded and excluded below.
    }
  }

  ObservationSet obs;
  obs.runs.reserve(total);
  for (const RunRecord& record : records) {
    obs.runs.push_back(record);
    if (record.diverged) continue;
    (record.world == 0 ? obs.without_target : obs.with_target)
        .push_back(record.canary_loss);
  }
  if (obs.without_target.empty() || obs.with_target.empty()) {
    throw DivergenceError("CollectObservations: a world has no surviving runs");
  }
  return obs;
}

RateCounts RatesAtThreshold(const ObservationSet& obs, double tau) {
  if (std::isnan(tau)) {
    throw std::invalid_argument("RatesAtThreshold: tau is NaN");
  }
  if (obs.without_target.empty() || obs.with_target.empty()) {
    throw std::invalid_argument("RatesAtThreshold: empty observation set");
  }
  RateCounts counts;
  counts.false_positives.trials = static_cast<int64_t>(obs.without_target.size());
  counts.false_negatives.trials = static_cast<int64_t>(obs.with_target.size());
  for (const double o : obs.without_target) {
    if (o >= tau) ++counts.false_positives.successes;
  }
  for (const double o : obs.with_target) {
    if (o < tau) ++counts.false_negatives.successes;
  }
  return counts;
}

EpsEstimate EstimateEps(const BinomialCount& fp, const BinomialCount& fn,
                        double confidence, double delta) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("EstimateEps: confidence outside (0, 1)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("EstimateEps: delta outside (0, 1)");
  }
  const double level = 1.0 - (1.0 - confidence) / 2.0;
  return EstimateFromUppers(ClopperPearsonUpper(fp, level),
                            ClopperPearsonUpper(fn, level), delta);
}

AuditReport BestThresholdEps(const ObservationSet& obs, const AuditConfig& config) {
  if (obs.without_target.empty() || obs.with_target.empty()) {
    throw std::invalid_argument("BestThresholdEps: empty observation set");
  }
  AuditReport report;
  if (!config.holdout) {
    const SweepChoice choice =
        SweepBest(obs.without_target, obs.with_target, config.confidence, config.delta);
    report = ReportFromChoice(choice, config);
  } else {
    // Threshold selection on the first half of each world, estimation on the
    // rest, so the reported bound is a strictly valid lower bound.
    const auto split = [](const std::vector<double>& v) {
      const size_t half = v.size() / 2;
      return std::make_pair(std::vector<double>(v.begin(), v.begin() + half),
                            std::vector<double>(v.begin() + half, v.end()));
    };
    if (obs.without_target.size() < 2 || obs.with_target.size() < 2) {
      throw std::invalid_argument(
          "BestThresholdEps: holdout mode needs at least 2 runs per world");
    }
    const auto [sel_without, est_without] = split(obs.without_target);
    const auto [sel_with, est_with] = split(obs.with_target);
    const SweepChoice selected =
        SweepBest(sel_without, sel_with, config.confidence, config.delta);

    ObservationSet estimation;
    estimation.without_target = est_without;
    estimation.with_target = est_with;
    RateCounts counts = RatesAtThreshold(estimation, selected.tau);
    if (selected.flipped) {
      counts.false_positives.successes =
          counts.false_positives.trials - counts.false_positives.successes;
      counts.false_negatives.successes =
          counts.false_negatives.trials - counts.false_negatives.successes;
    }
    SweepChoice choice;
    choice.tau = selected.tau;
    choice.flipped = selected.flipped;
    choice.fp = counts.false_positives;
    choice.fn = counts.false_negatives;
    choice.est = EstimateEps(counts.false_positives, counts.false_negatives,
                             config.confidence, config.delta);
    report = ReportFromChoice(choice, config);
  }

  report.runs = obs.runs;
  double accuracy_sum = 0.0;
  int64_t completed = 0;
  for (const RunRecord& run : obs.runs) {
    if (run.diverged) continue;
    accuracy_sum += run.train_accuracy;
    ++completed;
  }
  report.mean_train_accuracy = completed > 0 ? accuracy_sum / completed : 0.0;
  return report;
}

std::string ReportToJsonLine(const AuditReport& report) {
  nlohmann::ordered_json j;
  j["runs_without"] = report.runs_without;
  j["runs_with"] = report.runs_with;
  j["fp_count"] = report.fp_count;
  j["fn_count"] = report.fn_count;
  j["fpr"] = report.fpr;
  j["fnr"] = report.fnr;
  j["fpr_upper"] = report.fpr_upper;
  j["fnr_upper"] = report.fnr_upper;
  j["mu_emp"] = report.mu_emp;
  j["epsilon_emp"] = report.epsilon_emp;
  if (std::isfinite(report.threshold)) {
    j["threshold"] = report.threshold;
  } else {
    j["threshold"] = report.threshold > 0 ? "inf" : "-inf";
  }
  j["flipped"] = report.flipped;
  j["holdout"] = report.holdout;
  j["confidence"] = report.confidence;
  j["delta"] = report.delta;
  j["mean_train_accuracy"] = report.mean_train_accuracy;
  return j.dump();
}

void WriteObservationsCsv(std::ostream& out, const ObservationSet& obs) {
  out << "world,run,seed,loss,train_accuracy\n";
  char line[160];
  for (const RunRecord& run : obs.runs) {
    std::snprintf(line, sizeof(line), "%d,%lld,%llu,%.17g,%.17g\n", run.world,
                  static_cast<long long>(run.index),
                  static_cast<unsigned long long>(run.seed), run.canary_loss,
                  run.train_accuracy);
    out << line;
  }
}

std::string ToString(InitKind kind) {
  return kind == InitKind::kAverage ? "average" : "worst";
}

InitKind InitKindFromString(const std::string& name) {
  if (name == "average") return InitKind::kAverage;
  if (name == "worst") return InitKind::kWorst;
  throw std::invalid_argument("unknown init strategy: " + name);
}

}  // namespace dpaudit
