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

#ifndef STARE_CLI_RUN_CONFIG_H_
#define STARE_CLI_RUN_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "stare/experiments.h"
#include "stare/score_data.h"

namespace stare::cli {

// Environment variable consulted when neither the config nor a flag names an
// output directory.
inline constexpr const char* kOutputDirEnv = "STARE_OUTPUT_DIR";

enum class ProtocolMode { kHeldOut, kRepeatedSplits };

struct MethodEntry {
  AggregationMethod method = AggregationMethod::kStareSum;
  std::optional<std::string> name;
  // Explicit subset; when empty the method is expanded over `groups`.
  std::vector<std::string> detectors;
  MethodGroup group = MethodGroup::kAll;
  ForestParams forest;
};

struct RunConfig {
  std::filesystem::path scores;
  std::optional<TableFormat> scores_format;
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> held_out;

  ProtocolMode mode = ProtocolMode::kHeldOut;
  double ratio = 0.1;
  int repeats = 10;
  uint64_t seed = 0;

  std::vector<MethodEntry> methods;
  std::vector<MethodGroup> groups = {MethodGroup::kExternal,
                                     MethodGroup::kModelBased,
                                     MethodGroup::kAll};
  std::vector<std::string> categories;  // empty = every category in the file

  CalibrationOptions calibration;
  double target_tpr = 0.9;
  int threads = 0;

  std::filesystem::path output_dir;
  std::vector<std::string> formats = {"csv", "json", "md"};

  size_t subset_max_n = 0;
  std::vector<size_t> sweep_sizes;
  int sweep_repeats = 1;
  uint64_t sweep_seed = 0;

  // Files exist, exactly one protocol is configured, values are in range.
  void Validate() const;
};

// Relative paths are resolved against `base_dir`. Defaults the method list
// to Isolation Forest, Max-Norm and STARE.
RunConfig ParseRunConfig(const nlohmann::json& j,
                         const std::filesystem::path& base_dir);
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Method specs for the table's detectors.
std::vector<MethodSpec> ExpandMethods(const RunConfig& config,
                                      const DetectorManifest& manifest,
                                      const std::vector<std::string>& detectors);

}  // namespace stare::cli

#endif  // STARE_CLI_RUN_CONFIG_H_
