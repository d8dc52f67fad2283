/*
 * Copyright 2026 The STARE Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// stare: aggregate hallucination detector scores and run the evaluation
// protocols from the command line.
//
//   stare evaluate --config run.json
//   stare subset-search --config run.json --max-n 4
//   stare sweep --config run.json --sizes 10,100,1000,10000 --repeats 5
//   stare validate-manifest --config run.json --category is_hall

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stare/cli/commands.h"
#include "stare/cli/run_config.h"
#include "stare/status.h"

namespace {

struct Overrides {
  std::optional<uint64_t> seed;
  std::optional<int> repeats;
  std::optional<double> ratio;
  std::optional<int> threads;
  std::optional<std::string> output_dir;
  std::optional<double> target_tpr;
};

void AddCommonOptions(CLI::App* cmd, std::string* config_path,
                      Overrides* o) {
  cmd->add_option("-c,--config", *config_path, "Run config (JSON)")->required();
  cmd->add_option("--seed", o->seed, "Override the protocol seed");
  cmd->add_option("--repeats", o->repeats, "Override the number of repeated splits");
  cmd->add_option("--ratio", o->ratio, "Override the calibration ratio");
  cmd->add_option("--threads", o->threads, "Worker threads (0 = all cores)");
  cmd->add_option("-o,--output-dir", o->output_dir, "Override the output directory");
  cmd->add_option("--target-tpr", o->target_tpr, "TPR for the FPR metric");
}

void Apply(const Overrides& o, stare::cli::RunConfig* c) {
  if (o.seed) c->seed = *o.seed;
  if (o.repeats) c->repeats = *o.repeats;
  if (o.ratio) c->ratio = *o.ratio;
  if (o.threads) c->threads = *o.threads;
  if (o.output_dir) c->output_dir = *o.output_dir;
  if (o.target_tpr) c->target_tpr = *o.target_tpr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised aggregation of hallucination detector scores"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  std::optional<size_t> max_n;
  std::vector<size_t> sizes;
  std::optional<int> sweep_repeats;
  std::optional<uint64_t> sweep_seed;
  std::string category;

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate detectors and aggregators");
  AddCommonOptions(evaluate, &config_path, &overrides);

  auto* subset = app.add_subcommand("subset-search",
                                    "Exhaustive search for the best detector subsets");
  AddCommonOptions(subset, &config_path, &overrides);
  subset->add_option("--max-n", max_n, "Largest subset size (default: all)");

  auto* sweep = app.add_subcommand("sweep", "Reference set size sweep");
  AddCommonOptions(sweep, &config_path, &overrides);
  sweep->add_option("--sizes", sizes, "Reference sizes")->delimiter(',');
  sweep->add_option("--sweep-repeats", sweep_repeats, "Subsamples per size");
  sweep->add_option("--sweep-seed", sweep_seed, "Subsampling seed");

  auto* validate = app.add_subcommand(
      "validate-manifest", "Check that every oriented detector has AUROC >= 0.5");
  AddCommonOptions(validate, &config_path, &overrides);
  validate->add_option("--category", category, "Label category (default is_hall)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : stare::cli::kExitUserError;
  }

  stare::cli::RunConfig config;
  try {
    config = stare::cli::LoadRunConfig(config_path);
  } catch (const stare::Error& e) {
    std::cerr << "error [config] " << stare::ErrorCodeName(e.code()) << ": "
              << e.what() << "\n";
    return stare::cli::kExitUserError;
  }
  Apply(overrides, &config);

  if (*evaluate) return stare::cli::RunEvaluate(config, std::cout, std::cerr);
  if (*subset) {
    if (max_n) config.subset_max_n = *max_n;
    return stare::cli::RunSubsetSearch(config, std::cout, std::cerr);
  }
  if (*sweep) {
    if (!sizes.empty()) config.sweep_sizes = sizes;
    if (sweep_repeats) config.sweep_repeats = *sweep_repeats;
    if (sweep_seed) config.sweep_seed = *sweep_seed;
    return stare::cli::RunSweep(config, std::cout, std::cerr);
  }
  return stare::cli::RunValidateManifest(config, category, std::cout, std::cerr);
}
