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

#ifndef DPAUDIT_CAMPAIGN_H_
#define DPAUDIT_CAMPAIGN_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dpaudit/audit.h"
#include "dpaudit/data.h"

namespace dpaudit {

struct BlobsSource {
  int classes = 2;
  int dim = 2;
  int per_class = 100;
  double separation = 5.0;
};

struct IdxSource {
  std::string images;
  std::string labels;
};

struct CsvSource {
  std::string path;
};

struct DataConfig {
  std::variant<BlobsSource, IdxSource, CsvSource> source;
  double split_fraction = 0.5;
};

struct GridAxes {
  std::vector<double> epsilons;
  std::vector<double> clip_norms;
  // Private dataset sizes; 0 means the full private half.
  std::vector<int64_t> sizes;
  std::vector<InitKind> inits;
};

// A parsed campaign. `eta` is the learning rate at the full private-half
// size; cells that subsample to n samples scale it by n / half so that
// eta / B stays constant across the size axis.
struct CampaignConfig {
  std::string name;
  uint64_t seed = 0;
  int workers = 0;
  int repeats = 1;
  DataConfig data;
  std::vector<int> hidden_widths;  // hidden layer widths; empty = logistic
  int64_t iterations = 1;
  double eta = 1.0;
  int64_t runs_per_world = 10;
  double confidence = 0.95;
  double delta = 1e-5;
  bool holdout = false;
  CanarySpec canary;
  PretrainRecipe pretrain;
  GridAxes grid;
};

// One fully specified audit: a grid cell. Expansion order is epsilon, then
// clip norm, then size, then init.
struct CellSpec {
  int64_t index = 0;
  double epsilon = 0.0;
  double clip_norm = 1.0;
  int64_t size = 0;  // 0 = full private half
  InitKind init = InitKind::kAverage;
};

// Parses and validates a campaign config file (JSON). Collects every
// violation and throws a single ConfigError listing them all; parse errors
// carry the byte position reported by the JSON parser.
CampaignConfig LoadCampaignConfig(const std::string& path);
CampaignConfig CampaignConfigFromJsonText(const std::string& text,
                                          const std::string& origin);

std::vector<CellSpec> ExpandGrid(const CampaignConfig& config);

struct RunOptions {
  std::string out_dir;
  int workers = 0;  // overrides config when > 0
  std::optional<uint64_t> seed;
  bool dry_run = false;
  bool force = false;  // allow writing into an existing output directory
};

// Executes every grid cell and repeat: data split, initial parameters, canary,
// 2R training runs, threshold sweep. Writes one JSON report line per
// (cell, repeat) to <out>/reports.jsonl, one observation CSV per report under
// <out>/observations/, and a summary CSV. Returns a nonzero exit code when any
// cell failed. With dry_run, validates and prints the expanded grid only.
int RunCampaign(const CampaignConfig& config, const RunOptions& options,
                std::ostream& log);

// Aggregates report lines from every *.jsonl file in `report_dir` into a CSV
// sorted by (epsilon, clip_norm, size, init) with mean, standard deviation,
// and max of epsilon_emp across repeats. Malformed lines are skipped with a
// warning; returns nonzero when nothing could be parsed.
int EmitSummary(const std::string& report_dir, const std::string& out_file,
                std::ostream& log);

}  // namespace dpaudit

#endif  // DPAUDIT_CAMPAIGN_H_
