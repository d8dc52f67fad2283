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

#include "stare/aggregators.h"

#include <algorithm>
#include <set>
#include <utility>

#include "stare/status.h"

namespace stare {
namespace {

constexpr size_t kStackRow = 32;

// Sums in ascending order so the result does not depend on detector order.
double OrderIndependentSum(std::span<double> terms) {
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

void RequireNonEmpty(size_t n) {
  if (n == 0) {
    throw Error(ErrorCode::kEmptySubset, "aggregation over an empty subset");
  }
}

}  // namespace

std::string_view MethodName(AggregationMethod method) {
  switch (method) {
    case AggregationMethod::kStareSum: return "stare-sum";
    case AggregationMethod::kMaxNorm: return "max-norm";
    case AggregationMethod::kEq1Literal: return "eq1-literal";
    case AggregationMethod::kIsolationForest: return "isolation-forest";
  }
  return "stare-sum";
}

std::string_view MethodDisplayName(AggregationMethod method) {
  switch (method) {
    case AggregationMethod::kStareSum: return "STARE";
    case AggregationMethod::kMaxNorm: return "Max-Norm";
    case AggregationMethod::kEq1Literal: return "Eq1-Literal";
    case AggregationMethod::kIsolationForest: return "Isolation Forest";
  }
  return "STARE";
}

AggregationMethod ParseMethod(std::string_view text) {
  for (auto m : {AggregationMethod::kStareSum, AggregationMethod::kMaxNorm,
                 AggregationMethod::kEq1Literal,
                 AggregationMethod::kIsolationForest}) {
    if (text == MethodName(m)) return m;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown aggregation method '" + std::string(text) + "'");
}

void AggregateConfig::Validate(std::span<const std::string> available) const {
  RequireNonEmpty(detector_subset.size());
  std::set<std::string> seen;
  for (const auto& d : detector_subset) {
    if (std::find(available.begin(), available.end(), d) == available.end()) {
      throw Error(ErrorCode::kUnknownDetector,
                  "detector '" + d + "' in subset is not available");
    }
    if (!seen.insert(d).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "detector '" + d + "' listed twice in subset");
    }
  }
  const bool is_forest = method == AggregationMethod::kIsolationForest;
  if (is_forest != forest_params.has_value()) {
    throw Error(ErrorCode::kInvalidArgument,
                "forest parameters are required for, and only for, the "
                "isolation-forest method");
  }
  if (is_forest && forest_params->num_trees < 1) {
    throw Error(ErrorCode::kInvalidForestParams, "num_trees must be >= 1");
  }
}

double AggregateStare(std::span<const double> normalized_row) {
  RequireNonEmpty(normalized_row.size());
  if (normalized_row.size() <= kStackRow) {
    double buf[kStackRow];
    std::copy(normalized_row.begin(), normalized_row.end(), buf);
    return OrderIndependentSum({buf, normalized_row.size()});
  }
  std::vector<double> terms(normalized_row.begin(), normalized_row.end());
  return OrderIndependentSum(terms);
}

double AggregateMax(std::span<const double> normalized_row) {
  RequireNonEmpty(normalized_row.size());
  return *std::max_element(normalized_row.begin(), normalized_row.end());
}

double AggregateEq1Literal(std::span<const double> normalized_row,
                           std::span<const double> raw_row) {
  if (normalized_row.size() != raw_row.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "normalized and raw rows differ in length");
  }
  RequireNonEmpty(raw_row.size());
  std::vector<double> terms(raw_row.size());
  for (size_t k = 0; k < terms.size(); ++k) {
    terms[k] = normalized_row[k] * raw_row[k];
  }
  return OrderIndependentSum(terms);
}

std::vector<double> AggregateScores(const ScoreTable& table,
                                    const CalibrationStats& stats,
                                    const AggregateConfig& config,
                                    const IsolationForestModel* forest) {
  if (!table.canonical() || table.normalized()) {
    throw Error(ErrorCode::kNotCanonical,
                "aggregation expects a canonical table of raw scores");
  }
  config.Validate(table.detectors());
  const size_t k = config.detector_subset.size();
  std::vector<size_t> columns(k);
  std::vector<DetectorRange> ranges(k);
  for (size_t i = 0; i < k; ++i) {
    columns[i] = table.RequireColumn(config.detector_subset[i]);
    if (config.method != AggregationMethod::kIsolationForest) {
      ranges[i] = stats.Range(config.detector_subset[i]);
    }
  }
  if (config.method == AggregationMethod::kIsolationForest) {
    if (forest == nullptr) {
      throw Error(ErrorCode::kForestNotFitted,
                  "isolation-forest aggregation requires a fitted model");
    }
    if (forest->detectors() != config.detector_subset) {
      throw Error(ErrorCode::kDetectorSetMismatch,
                  "forest was fitted on a different detector subset");
    }
  }

  std::vector<double> out(table.num_samples());
  std::vector<double> raw(k);
  std::vector<double> normalized(k);
  for (size_t r = 0; r < table.num_samples(); ++r) {
    for (size_t i = 0; i < k; ++i) raw[i] = table.at(r, columns[i]);
    if (config.method == AggregationMethod::kIsolationForest) {
      out[r] = forest->Score(raw);
      continue;
    }
    for (size_t i = 0; i < k; ++i) {
      normalized[i] = NormalizeValue(raw[i], ranges[i], stats.clamp());
    }
    switch (config.method) {
      case AggregationMethod::kStareSum:
        out[r] = AggregateStare(normalized);
        break;
      case AggregationMethod::kMaxNorm:
        out[r] = AggregateMax(normalized);
        break;
      case AggregationMethod::kEq1Literal:
        out[r] = AggregateEq1Literal(normalized, raw);
        break;
      case AggregationMethod::kIsolationForest:
        break;
    }
  }
  return out;
}

std::vector<SampleScore> AggregateTable(const ScoreTable& table,
                                        const CalibrationStats& stats,
                                        const AggregateConfig& config,
                                        const IsolationForestModel* forest) {
  std::vector<double> scores = AggregateScores(table, stats, config, forest);
  std::vector<SampleScore> out;
  out.reserve(scores.size());
  for (size_t r = 0; r < scores.size(); ++r) {
    out.push_back({table.sample_ids()[r], scores[r]});
  }
  return out;
}

FittedAggregator FitAggregator(const ReferenceSet& reference,
                               const AggregateConfig& config,
                               const CalibrationOptions& options) {
  config.Validate(reference.detectors());
  FittedAggregator fitted{config, FitCalibration(reference, options),
                          std::nullopt};
  if (config.method == AggregationMethod::kIsolationForest) {
    fitted.forest = FitIsolationForest(reference, config.detector_subset,
                                       *config.forest_params);
  }
  return fitted;
}

}  // namespace stare
