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

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dpaudit/campaign.h"
#include "dpaudit/errors.h"

int main(int argc, char** argv) {
  CLI::App app{"dpaudit: black-box privacy auditing of DP-SGD training"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  std::optional<uint64_t> seed;
  bool dry_run = false;
  bool force = false;

  CLI::App* run = app.add_subcommand("run", "Execute an audit campaign");
  run->add_option("--config", config_path, "Campaign config file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory for reports");
  run->add_option("--workers", workers, "Worker threads for training runs")
      ->envname("DPAUDIT_WORKERS");
  run->add_option("--seed", seed, "Override the campaign master seed");
  run->add_flag("--dry-run", dry_run, "Validate and print the expanded grid only");
  run->add_flag("--force", force, "Append into an existing output directory");

  std::string report_dir;
  std::string summary_file;
  CLI::App* summarize = app.add_subcommand("summarize", "Aggregate reports into a CSV");
  summarize->add_option("--reports", report_dir, "Directory holding report .jsonl files")
      ->required()
      ->check(CLI::ExistingDirectory);
  summarize->add_option("--out", summary_file, "Summary CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (!dry_run && out_dir.empty()) {
        std::cerr << "error: --out is required unless --dry-run is given\n";
        return 1;
      }
      const dpaudit::CampaignConfig config = dpaudit::LoadCampaignConfig(config_path);
      dpaudit::RunOptions options;
      options.out_dir = out_dir;
      options.workers = workers;
      options.seed = seed;
      options.dry_run = dry_run;
      options.force = force;
      return dpaudit::RunCampaign(config, options, std::cout);
    }
    if (summarize->parsed()) {
      if (summary_file.empty()) {
        summary_file = report_dir + "/summary.csv";
      }
      return dpaudit::EmitSummary(report_dir, summary_file, std::cout);
    }
  } catch (const dpaudit::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
