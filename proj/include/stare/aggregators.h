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

#ifndef STARE_AGGREGATORS_H_
#define STARE_AGGREGATORS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stare/isolation_forest.h"
#include "stare/normalization.h"
#include "stare/score_data.h"

namespace stare {

enum class AggregationMethod {
  kStareSum,         // Sum of normalized scores.
  kMaxNorm,          // Maximum of normalized scores.
  kEq1Literal,       // Sum of normalized score times raw canonical score.
  kIsolationForest,  // Isolation forest over raw canonical scores.
};

std::string_view MethodName(AggregationMethod method);
std::string_view MethodDisplayName(AggregationMethod method);
AggregationMethod ParseMethod(std::string_view text);

struct AggregateConfig {
  AggregationMethod method = AggregationMethod::kStareSum;
  std::vector<std::string> detector_subset;
  std::optional<ForestParams> forest_params;

  // Checks the subset against the available detectors and the presence of
  // forest parameters.
  void Validate(std::span<const std::string> available) const;
};

double AggregateStare(std::span<const double> normalized_row);
double AggregateMax(std::span<const double> normalized_row);
double AggregateEq1Literal(std::span<const double> normalized_row,
                           std::span<const double> raw_row);

struct SampleScore {
  std::string sample_id;
  double score;
};

// Aggregate score per row of a canonical (not normalized) table. `forest`
// is required for the isolation-forest method and must have been fitted
// on config.detector_subset.
std::vector<double> AggregateScores(const ScoreTable& table,
                                    const CalibrationStats& stats,
                                    const AggregateConfig& config,
                                    const IsolationForestModel* forest = nullptr);

std::vector<SampleScore> AggregateTable(
    const ScoreTable& table, const CalibrationStats& stats,
    const AggregateConfig& config,
    const IsolationForestModel* forest = nullptr);

// Calibration plus, when needed, a forest fitted on one reference set.
struct FittedAggregator {
  AggregateConfig config;
  CalibrationStats stats;
  std::optional<IsolationForestModel> forest;

  std::vector<double> Score(const ScoreTable& table) const {
    return AggregateScores(table, stats, config,
                           forest ? &*forest : nullptr);
  }
};

FittedAggregator FitAggregator(const ReferenceSet& reference,
                               const AggregateConfig& config,
                               const CalibrationOptions& options = {});

}  // namespace stare

#endif  // STARE_AGGREGATORS_H_
