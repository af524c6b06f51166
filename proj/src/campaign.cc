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

#include "dpaudit/campaign.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "dpaudit/errors.h"
#include "dpaudit/gdp.h"
#include "dpaudit/rng.h"

namespace dpaudit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// --- config parsing -------------------------------------------------------

// Collects violations instead of failing fast so a user can fix a config in
// one pass.
class Checker {
 public:
  void Add(const std::string& message) { violations_.push_back(message); }

  void KnownKeys(const json& obj, const std::string& path,
                 std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
      (void)value;
      if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
            return key == a;
          }) == allowed.end()) {
        Add(path + ": unknown key '" + key + "'");
      }
    }
  }

  const json* Section(const json& obj, const std::string& path, const char* key,
                      bool required) {
    if (!obj.contains(key)) {
      if (required) Add(path + "." + key + ": missing required section");
      return nullptr;
    }
    if (!obj[key].is_object()) {
      Add(path + "." + key + ": expected an object");
      return nullptr;
    }
    return &obj[key];
  }

  template <typename T>
  std::optional<T> Number(const json& obj, const std::string& path, const char* key,
                          bool required) {
    if (!obj.contains(key)) {
      if (required) Add(path + "." + key + ": missing required value");
      return std::nullopt;
    }
    if (!obj[key].is_number()) {
      Add(path + "." + key + ": expected a number");
      return std::nullopt;
    }
    return obj[key].get<T>();
  }

  std::optional<bool> Bool(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) return std::nullopt;
    if (!obj[key].is_boolean()) {
      Add(path + "." + key + ": expected a boolean");
      return std::nullopt;
    }
    return obj[key].get<bool>();
  }

  std::optional<std::string> String(const json& obj, const std::string& path,
                                    const char* key, bool required) {
    if (!obj.contains(key)) {
      if (required) Add(path + "." + key + ": missing required value");
      return std::nullopt;
    }
    if (!obj[key].is_string()) {
      Add(path + "." + key + ": expected a string");
      return std::nullopt;
    }
    return obj[key].get<std::string>();
  }

  template <typename T>
  std::optional<std::vector<T>> NumberList(const json& obj, const std::string& path,
                                           const char* key, bool required) {
    if (!obj.contains(key)) {
      if (required) Add(path + "." + key + ": missing required list");
      return std::nullopt;
    }
    if (!obj[key].is_array()) {
      Add(path + "." + key + ": expected a list of numbers");
      return std::nullopt;
    }
    std::vector<T> out;
    for (const auto& item : obj[key]) {
      if (!item.is_number()) {
        Add(path + "." + key + ": expected a list of numbers");
        return std::nullopt;
      }
      out.push_back(item.get<T>());
    }
    return out;
  }

  bool ok() const { return violations_.empty(); }
  std::vector<std::string> take() { return std::move(violations_); }

 private:
  std::vector<std::string> violations_;
};

void ParseDataSection(Checker& check, const json& section, DataConfig& out) {
  check.KnownKeys(section, "data",
                  {"source", "classes", "dim", "per_class", "separation", "images",
                   "labels", "path", "split_fraction"});
  const auto source = check.String(section, "data", "source", true);
  if (auto fraction = check.Number<double>(section, "data", "split_fraction", false)) {
    out.split_fraction = *fraction;
  }
  if (!(out.split_fraction > 0.0 && out.split_fraction < 1.0)) {
    check.Add("data.split_fraction: must lie in (0, 1)");
  }
  if (!source) return;
  if (*source == "blobs") {
    BlobsSource blobs;
    if (auto v = check.Number<int>(section, "data", "classes", true)) blobs.classes = *v;
    if (auto v = check.Number<int>(section, "data", "dim", true)) blobs.dim = *v;
    if (auto v = check.Number<int>(section, "data", "per_class", true)) blobs.per_class = *v;
    if (auto v = check.Number<double>(section, "data", "separation", true)) {
      blobs.separation = *v;
    }
    if (blobs.classes < 2) check.Add("data.classes: must be >= 2");
    if (blobs.dim < 1) check.Add("data.dim: must be >= 1");
    if (blobs.per_class < 1) check.Add("data.per_class: must be >= 1");
    if (!(blobs.separation >= 0.0)) check.Add("data.separation: must be >= 0");
    out.source = blobs;
  } else if (*source == "idx") {
    IdxSource idx;
    if (auto v = check.String(section, "data", "images", true)) idx.images = *v;
    if (auto v = check.String(section, "data", "labels", true)) idx.labels = *v;
    out.source = idx;
  } else if (*source == "csv") {
    CsvSource csv;
    if (auto v = check.String(section, "data", "path", true)) csv.path = *v;
    out.source = csv;
  } else {
    check.Add("data.source: must be one of blobs, idx, csv");
  }
}

void ParseCanarySection(Checker& check, const json& section, CanarySpec& out) {
  check.KnownKeys(section, "canary", {"strategy", "label", "scale", "features"});
  if (auto strategy = check.String(section, "canary", "strategy", true)) {
    try {
      out.strategy = CanaryStrategyFromString(*strategy);
    } catch (const std::invalid_argument& e) {
      check.Add(std::string("canary.strategy: ") + e.what());
    }
  }
  if (auto label = check.Number<int>(section, "canary", "label", false)) {
    if (*label < 0) {
      check.Add("canary.label: must be >= 0");
    } else {
      out.label = *label;
    }
  }
  if (auto scale = check.Number<double>(section, "canary", "scale", false)) {
    out.scale = *scale;
  }
  if (!(out.scale > 0.0)) check.Add("canary.scale: must be > 0");
  if (auto features = check.NumberList<double>(section, "canary", "features", false)) {
    out.fixed_features = *features;
  }
  if (out.strategy == CanaryStrategy::kFixed && out.fixed_features.empty()) {
    check.Add("canary.features: required for the fixed strategy");
  }
}

}  // namespace

CampaignConfig CampaignConfigFromJsonText(const std::string& text,
                                          const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({origin + ": " + e.what()});
  }
  Checker check;
  CampaignConfig config;
  if (!root.is_object()) {
    throw ConfigError({origin + ": top level must be an object"});
  }
  check.KnownKeys(root, origin,
                  {"name", "seed", "workers", "repeats", "data", "model", "train",
                   "audit", "canary", "pretrain", "grid"});

  config.name = check.String(root, origin, "name", false).value_or("campaign");
  if (auto seed = check.Number<uint64_t>(root, origin, "seed", true)) config.seed = *seed;
  if (auto workers = check.Number<int>(root, origin, "workers", false)) {
    config.workers = *workers;
    if (config.workers < 0) check.Add("workers: must be >= 0");
  }
  if (auto repeats = check.Number<int>(root, origin, "repeats", false)) {
    config.repeats = *repeats;
  }
  if (config.repeats < 1) check.Add("repeats: must be >= 1");

  if (const json* data = check.Section(root, origin, "data", true)) {
    ParseDataSection(check, *data, config.data);
  }

  if (const json* model = check.Section(root, origin, "model", false)) {
    check.KnownKeys(*model, "model", {"hidden"});
    if (auto hidden = check.NumberList<int>(*model, "model", "hidden", false)) {
      config.hidden_widths = *hidden;
      for (int w : config.hidden_widths) {
        if (w < 1) check.Add("model.hidden: widths must be >= 1");
      }
    }
  }

  if (const json* train = check.Section(root, origin, "train", true)) {
    check.KnownKeys(*train, "train", {"iterations", "eta"});
    if (auto t = check.Number<int64_t>(*train, "train", "iterations", true)) {
      config.iterations = *t;
    }
    if (auto eta = check.Number<double>(*train, "train", "eta", true)) config.eta = *eta;
    if (config.iterations < 1) check.Add("train.iterations: must be >= 1");
    if (!(config.eta > 0.0)) check.Add("train.eta: must be > 0");
  }

  if (const json* audit = check.Section(root, origin, "audit", true)) {
    check.KnownKeys(*audit, "audit", {"runs_per_world", "confidence", "delta", "holdout"});
    if (auto r = check.Number<int64_t>(*audit, "audit", "runs_per_world", true)) {
      config.runs_per_world = *r;
    }
    if (auto c = check.Number<double>(*audit, "audit", "confidence", false)) {
      config.confidence = *c;
    }
    if (auto d = check.Number<double>(*audit, "audit", "delta", false)) config.delta = *d;
    if (auto h = check.Bool(*audit, "audit", "holdout")) config.holdout = *h;
    if (config.runs_per_world < 1) check.Add("audit.runs_per_world: must be >= 1");
    if (!(config.confidence > 0.0 && config.confidence < 1.0)) {
      check.Add("audit.confidence: must lie in (0, 1)");
    }
    if (!(config.delta > 0.0 && config.delta < 1.0)) {
      check.Add("audit.delta: must lie in (0, 1)");
    }
  }

  if (const json* canary = check.Section(root, origin, "canary", false)) {
    ParseCanarySection(check, *canary, config.canary);
  }

  if (const json* pretrain = check.Section(root, origin, "pretrain", false)) {
    check.KnownKeys(*pretrain, "pretrain", {"epochs", "batch_size", "eta"});
    if (auto e = check.Number<int>(*pretrain, "pretrain", "epochs", false)) {
      config.pretrain.epochs = *e;
    }
    if (auto b = check.Number<int>(*pretrain, "pretrain", "batch_size", false)) {
      config.pretrain.batch_size = *b;
    }
    if (auto lr = check.Number<double>(*pretrain, "pretrain", "eta", false)) {
      config.pretrain.learning_rate = *lr;
    }
    if (config.pretrain.epochs < 0) check.Add("pretrain.epochs: must be >= 0");
    if (config.pretrain.batch_size < 1) check.Add("pretrain.batch_size: must be >= 1");
    if (!(config.pretrain.learning_rate > 0.0)) check.Add("pretrain.eta: must be > 0");
  }

  if (const json* grid = check.Section(root, origin, "grid", true)) {
    check.KnownKeys(*grid, "grid", {"epsilons", "clip_norms", "sizes", "inits"});
    if (auto eps = check.NumberList<double>(*grid, "grid", "epsilons", true)) {
      config.grid.epsilons = *eps;
    }
    if (auto clips = check.NumberList<double>(*grid, "grid", "clip_norms", true)) {
      config.grid.clip_norms = *clips;
    }
    if (auto sizes = check.NumberList<int64_t>(*grid, "grid", "sizes", false)) {
      config.grid.sizes = *sizes;
    }
    if (config.grid.sizes.empty()) config.grid.sizes = {0};
    if (grid->contains("inits")) {
      if (!(*grid)["inits"].is_array()) {
        check.Add("grid.inits: expected a list of strings");
      } else {
        for (const auto& item : (*grid)["inits"]) {
          if (!item.is_string()) {
            check.Add("grid.inits: expected a list of strings");
            break;
          }
          try {
            config.grid.inits.push_back(InitKindFromString(item.get<std::string>()));
          } catch (const std::invalid_argument& e) {
            check.Add(std::string("grid.inits: ") + e.what());
          }
        }
      }
    } else {
      check.Add("grid.inits: missing required list");
    }
    if (config.grid.epsilons.empty()) check.Add("grid.epsilons: must be non-empty");
    for (double e : config.grid.epsilons) {
      if (!(e > 0.0)) check.Add("grid.epsilons: entries must be > 0");
    }
    if (config.grid.clip_norms.empty()) check.Add("grid.clip_norms: must be non-empty");
    for (double c : config.grid.clip_norms) {
      if (!(c > 0.0)) check.Add("grid.clip_norms: entries must be > 0");
    }
    for (int64_t n : config.grid.sizes) {
      if (n < 0) check.Add("grid.sizes: entries must be >= 0 (0 = full private half)");
    }
    if (config.grid.inits.empty() && check.ok()) {
      check.Add("grid.inits: must be non-empty");
    }
  }

  if (!check.ok()) {
    throw ConfigError(check.take());
  }
  return config;
}

CampaignConfig LoadCampaignConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError({path + ": cannot open"});
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return CampaignConfigFromJsonText(buffer.str(), path);
}

std::vector<CellSpec> ExpandGrid(const CampaignConfig& config) {
  std::vector<CellSpec> cells;
  int64_t index = 0;
  for (double epsilon : config.grid.epsilons) {
    for (double clip : config.grid.clip_norms) {
      for (int64_t size : config.grid.sizes) {
        for (InitKind init : config.grid.inits) {
          cells.push_back(CellSpec{index++, epsilon, clip, size, init});
        }
      }
    }
  }
  return cells;
}

namespace {

Dataset MaterializeData(const DataConfig& data, uint64_t seed) {
  if (const auto* blobs = std::get_if<BlobsSource>(&data.source)) {
    return SynthBlobs(blobs->classes, blobs->dim, blobs->per_class, blobs->separation,
                      seed);
  }
  if (const auto* idx = std::get_if<IdxSource>(&data.source)) {
    return LoadIdx(idx->images, idx->labels);
  }
  return LoadFeatureCsv(std::get<CsvSource>(data.source).path);
}

std::string CellLabel(const CellSpec& cell, int repeat) {
  std::ostringstream name;
  name << "cell" << cell.index << "_rep" << repeat;
  return name.str();
}

struct CellOutcome {
  AuditReport report;
  double sigma = 0.0;
  double eta = 0.0;
  int64_t private_size = 0;
  uint64_t master_seed = 0;
};

CellOutcome RunCell(const CampaignConfig& config, const CellSpec& cell, int repeat,
                    const Dataset& full, uint64_t campaign_seed, int workers) {
  SplitSpec split;
  split.fraction = config.data.split_fraction;
  split.seed = DeriveSeed(campaign_seed, kSeedSplit, static_cast<uint64_t>(repeat));
  if (cell.size > 0) split.subsample = cell.size;
  auto [private_data, aux_data] = SplitPrivateAux(full, split);

  // eta / B stays constant across the size axis: scale from the full half.
  const int64_t half =
      std::llround(config.data.split_fraction * static_cast<double>(full.size()));
  const double eta = config.eta * static_cast<double>(private_data.size()) /
                     static_cast<double>(half);

  ModelSpec spec;
  spec.widths.push_back(full.dimension());
  for (int w : config.hidden_widths) spec.widths.push_back(w);
  spec.widths.push_back(full.num_classes);

  const double sigma =
      CalibrateSigma(PrivacyBudget{cell.epsilon, config.delta}, config.iterations);

  AuditConfig audit;
  audit.runs_per_world = config.runs_per_world;
  audit.confidence = config.confidence;
  audit.delta = config.delta;
  audit.canary = config.canary;
  audit.init.kind = cell.init;
  audit.init.recipe = config.pretrain;
  audit.hyper = HyperParams{config.iterations, eta, private_data.size(), cell.clip_norm,
                            sigma};
  audit.model = spec;
  audit.holdout = config.holdout;
  audit.workers = workers;

  const uint64_t init_seed = DeriveSeed(campaign_seed, kSeedInit, static_cast<uint64_t>(repeat));
  const ParamVector theta0 =
      cell.init == InitKind::kAverage
          ? XavierInit(spec, init_seed)
          : SgdPretrain(spec, aux_data, config.pretrain.epochs,
                        config.pretrain.learning_rate, config.pretrain.batch_size,
                        init_seed);

  CellOutcome outcome;
  outcome.master_seed = DeriveSeed(campaign_seed, kSeedAudit,
                                   static_cast<uint64_t>(cell.index),
                                   static_cast<uint64_t>(repeat));
  const ObservationSet obs =
      CollectObservations(audit, private_data, theta0, outcome.master_seed);
  outcome.report = BestThresholdEps(obs, audit);
  outcome.sigma = sigma;
  outcome.eta = eta;
  outcome.private_size = private_data.size();
  return outcome;
}

json CellReportJson(const CampaignConfig& config, const CellSpec& cell, int repeat,
                    const CellOutcome& outcome) {
  json line = json::parse(ReportToJsonLine(outcome.report));
  json merged;
  merged["campaign"] = config.name;
  merged["cell"] = cell.index;
  merged["repeat"] = repeat;
  merged["epsilon"] = cell.epsilon;
  merged["clip_norm"] = cell.clip_norm;
  merged["size"] = outcome.private_size;
  merged["init"] = ToString(cell.init);
  merged["canary"] = ToString(config.canary.strategy);
  merged["sigma"] = outcome.sigma;
  merged["eta"] = outcome.eta;
  merged["iterations"] = config.iterations;
  merged["runs_per_world"] = config.runs_per_world;
  merged["master_seed"] = outcome.master_seed;
  merged.update(line);
  return merged;
}

}  // namespace

int RunCampaign(const CampaignConfig& config, const RunOptions& options,
                std::ostream& log) {
  const uint64_t seed = options.seed.value_or(config.seed);
  const int workers = options.workers > 0 ? options.workers : config.workers;
  const std::vector<CellSpec> cells = ExpandGrid(config);

  if (options.dry_run) {
    log << "campaign '" << config.name << "': " << cells.size() << " cells x "
        << config.repeats << " repeats, seed " << seed << "\n";
    for (const CellSpec& cell : cells) {
      log << "  cell " << cell.index << ": epsilon=" << cell.epsilon
          << " clip_norm=" << cell.clip_norm << " size="
          << (cell.size > 0 ? std::to_string(cell.size) : std::string("full-half"))
          << " init=" << ToString(cell.init) << "\n";
    }
    return 0;
  }

  if (options.out_dir.empty()) {
    log << "error: no output directory given\n";
    return 1;
  }
  const fs::path out(options.out_dir);
  if (fs::exists(out) && !fs::is_empty(out) && !options.force) {
    log << "error: output directory " << out
        << " exists and is not empty; pass --force to append\n";
    return 1;
  }
  fs::create_directories(out / "observations");
  std::ofstream reports(out / "reports.jsonl", std::ios::app);
  if (!reports) {
    log << "error: cannot open " << (out / "reports.jsonl") << " for appending\n";
    return 1;
  }

  // File-backed sources are immutable across repeats; blobs are redrawn per
  // repeat so repeats are independent end to end.
  const bool blob_source = std::holds_alternative<BlobsSource>(config.data.source);
  Dataset file_data;
  if (!blob_source) {
    file_data = MaterializeData(config.data, seed);
  }

  int failures = 0;
  int written = 0;
  for (int repeat = 0; repeat < config.repeats; ++repeat) {
    const Dataset full =
        blob_source
            ? MaterializeData(config.data,
                              DeriveSeed(seed, kSeedData, static_cast<uint64_t>(repeat)))
            : file_data;
    for (const CellSpec& cell : cells) {
      try {
        const CellOutcome outcome = RunCell(config, cell, repeat, full, seed, workers);
        const fs::path obs_path =
            out / "observations" / (CellLabel(cell, repeat) + ".csv");
        {
          ObservationSet view;
          view.runs = outcome.report.runs;
          std::ofstream obs_file(obs_path);
          WriteObservationsCsv(obs_file, view);
        }
        reports << CellReportJson(config, cell, repeat, outcome).dump() << "\n";
        reports.flush();
        ++written;
        log << "[" << config.name << "] " << CellLabel(cell, repeat)
            << ": epsilon=" << cell.epsilon << " init=" << ToString(cell.init)
            << " -> epsilon_emp=" << outcome.report.epsilon_emp << "\n";
      } catch (const std::exception& e) {
        ++failures;
        log << "[" << config.name << "] " << CellLabel(cell, repeat)
            << ": FAILED: " << e.what() << "\n";
      }
    }
  }

  if (written > 0) {
    EmitSummary(out.string(), (out / "summary.csv").string(), log);
  }
  return failures == 0 ? 0 : 1;
}

int EmitSummary(const std::string& report_dir, const std::string& out_file,
                std::ostream& log) {
  const fs::path dir(report_dir);
  if (!fs::is_directory(dir)) {
    log << "error: " << report_dir << " is not a directory\n";
    return 1;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    log << "error: no .jsonl report files in " << report_dir << "\n";
    return 1;
  }

  using Key = std::tuple<double, double, int64_t, std::string>;
  std::map<Key, std::vector<double>> groups;
  size_t parsed = 0;
  size_t malformed = 0;
  for (const fs::path& file : files) {
    std::ifstream in(file);
    std::string line;
    size_t line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (line.empty()) continue;
      try {
        const json j = json::parse(line);
        const Key key{j.at("epsilon").get<double>(), j.at("clip_norm").get<double>(),
                      j.at("size").get<int64_t>(), j.at("init").get<std::string>()};
        groups[key].push_back(j.at("epsilon_emp").get<double>());
        ++parsed;
      } catch (const std::exception& e) {
        ++malformed;
        log << "warning: " << file.string() << ":" << line_number
            << ": skipping malformed report (" << e.what() << ")\n";
      }
    }
  }
  if (parsed == 0) {
    log << "error: no well-formed report lines found\n";
    return 1;
  }

  std::ofstream out(out_file);
  if (!out) {
    log << "error: cannot write " << out_file << "\n";
    return 1;
  }
  out << "epsilon,clip_norm,size,init,repeats,mean_eps_emp,sd_eps_emp,max_eps_emp\n";
  char row[256];
  for (const auto& [key, values] : groups) {
    const auto& [epsilon, clip, size, init] = key;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double sd = 0.0;
    if (values.size() > 1) {
      for (double v : values) sd += (v - mean) * (v - mean);
      sd = std::sqrt(sd / static_cast<double>(values.size() - 1));
    }
    const double max = *std::max_element(values.begin(), values.end());
    std::snprintf(row, sizeof(row), "%.17g,%.17g,%lld,%s,%zu,%.17g,%.17g,%.17g\n",
                  epsilon, clip, static_cast<long long>(size), init.c_str(),
                  values.size(), mean, sd, max);
    out << row;
  }
  log << "summary: " << parsed << " reports, " << groups.size() << " cells -> "
      << out_file << (malformed > 0 ? " (" + std::to_string(malformed) + " skipped)" : "")
      << "\n";
  return 0;
}

}  // namespace dpaudit
