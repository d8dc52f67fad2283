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

#ifndef STARE_EXPERIMENTS_H_
#define STARE_EXPERIMENTS_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stare/aggregators.h"
#include "stare/isolation_forest.h"
#include "stare/normalization.h"
#include "stare/score_data.h"

namespace stare {

enum class MethodGroup { kSingle, kExternal, kModelBased, kAll };

std::string_view GroupName(MethodGroup group);
MethodGroup ParseGroup(std::string_view text);

struct MethodSpec {
  std::string name;
  MethodGroup group = MethodGroup::kAll;
  AggregateConfig config;
};

// One spec per (method, group) for the external, model-based and all
// detector groups, skipping groups with fewer than two detectors. Subsets
// follow the table's column order.
std::vector<MethodSpec> BuildMethodGrid(
    const DetectorManifest& manifest, std::span<const std::string> detectors,
    std::span<const AggregationMethod> methods,
    const ForestParams& forest = {});

// Calibrate on an external unlabeled set and evaluate on the full table.
struct HeldOutProtocol {
  std::shared_ptr<const ReferenceSet> reference;
  std::string label;  // Provenance, e.g. the held-out file path.
};

// Calibrate on a random `ratio` of the table and evaluate on the rest,
// `repeats` times.
struct RepeatedSplitsProtocol {
  double ratio = 0.1;
  int repeats = 10;
  uint64_t seed = 0;
};

using ReferenceProtocol = std::variant<HeldOutProtocol, RepeatedSplitsProtocol>;

struct ExperimentOptions {
  CalibrationOptions calibration;
  double target_tpr = 0.9;
  int threads = 1;  // 0 = all cores.
};

// Population mean and standard deviation over repeats.
struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
};

MetricSummary Summarize(std::span<const double> values);

struct ProtocolInfo {
  std::string mode;  // "held-out" or "repeated-splits"
  size_t num_splits = 1;
  double ratio = 0.0;         // repeated-splits only
  std::string held_out;       // held-out only
  size_t reference_size = 0;  // rows per reference set
  uint64_t seed = 0;
  size_t resampled_splits = 0;  // retries caused by degenerate eval labels
  std::string evaluation_partition;  // "full-table" or "split-remainder"
};

struct EvalRow {
  std::string method_name;
  MethodGroup group = MethodGroup::kSingle;
  std::optional<DetectorClass> detector_class;  // single rows only
  std::vector<std::string> detectors;
  MetricSummary auroc;
  MetricSummary fpr;
  std::string best_single;  // detector the deltas are measured against
  double delta_auroc = 0.0;
  double delta_fpr = 0.0;
};

struct EvalReport {
  std::string category;
  ProtocolInfo protocol;
  std::vector<EvalRow> rows;

  const EvalRow* Find(std::string_view method_name, MethodGroup group) const;
};

// Evaluates every single detector (rank-based, calibration-free) and every
// method spec under the protocol. Deltas are taken against the best single
// detector by mean AUROC within the method's group (best overall for
// single rows and the "all" group).
EvalReport EvaluateProtocol(const ScoreTable& table, const LabelVector& labels,
                            const DetectorManifest& manifest,
                            const ReferenceProtocol& protocol,
                            std::span<const MethodSpec> methods,
                            const ExperimentOptions& options = {});

std::vector<EvalReport> PerCategoryReport(
    const ScoreTable& table, std::span<const LabelVector> all_labels,
    const DetectorManifest& manifest, const ReferenceProtocol& protocol,
    std::span<const MethodSpec> methods, const ExperimentOptions& options = {});

constexpr size_t kMaxSubsetSearchDetectors = 16;

struct SubsetResult {
  size_t size = 0;
  std::vector<std::string> best_subset;
  MetricSummary auroc;
  MetricSummary fpr;
  size_t search_space = 0;  // C(K, size)
};

struct SubsetSearchResult {
  std::string category;
  ProtocolInfo protocol;
  std::vector<SubsetResult> rows;
};

// Exhaustive search over every detector subset of size 1..max_n (0 means
// K). All subsets see the same calibration splits. Ties on mean AUROC go
// to the lexicographically first subset in column order. `method` is
// stare-sum or eq1-literal.
SubsetSearchResult SubsetSearch(const ScoreTable& table,
                                const LabelVector& labels,
                                const DetectorManifest& manifest,
                                const ReferenceProtocol& protocol,
                                AggregationMethod method, size_t max_n,
                                const ExperimentOptions& options = {});

struct SweepRow {
  size_t size = 0;
  std::string method;
  MetricSummary auroc;
  MetricSummary fpr;
};

// For each size, subsamples the held-out set `repeats` times, calibrates
// STARE and fits an isolation forest on each subsample, and evaluates both
// on the full labeled table. A size equal to the held-out size uses the
// held-out set unchanged.
std::vector<SweepRow> ReferenceSizeSweep(const ScoreTable& table,
                                         const LabelVector& labels,
                                         const DetectorManifest& manifest,
                                         const ReferenceSet& held_out,
                                         std::span<const size_t> sizes,
                                         int repeats, uint64_t seed,
                                         const ForestParams& forest = {},
                                         const ExperimentOptions& options = {});

struct OrientationCheck {
  std::string detector;
  double auroc = 0.0;
  bool ok = false;  // AUROC >= 0.5 after canonicalization
};

std::vector<OrientationCheck> ValidateOrientation(const ScoreTable& canonical,
                                                  const LabelVector& labels);

}  // namespace stare

#endif  // STARE_EXPERIMENTS_H_
