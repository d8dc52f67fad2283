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

#include "stare/experiments.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "stare/metrics.h"
#include "stare/parallel.h"
#include "stare/random.h"
#include "stare/status.h"

namespace stare {
namespace {

constexpr int kMaxResampleAttempts = 100;

// One calibrate-then-evaluate round of a protocol.
struct Trial {
  std::shared_ptr<const ReferenceSet> reference;
  std::shared_ptr<const ScoreTable> evaluation;
  LabelVector labels;
  uint64_t split_seed = 0;
  bool held_out = false;
};

struct MetricPair {
  double auroc = 0.0;
  double fpr = 0.0;
};

MetricPair Measure(std::span<const double> scores, const LabelVector& labels,
                   double target_tpr) {
  return {Auroc(scores, labels), FprAtTpr(scores, labels, target_tpr)};
}

void RequireCanonical(const ScoreTable& table) {
  if (!table.canonical() || table.normalized()) {
    throw Error(ErrorCode::kNotCanonical,
                "experiments expect a canonical table of raw scores");
  }
}

void RequireAligned(const ScoreTable& table, const LabelVector& labels) {
  if (labels.labels.size() != table.num_samples()) {
    throw Error(ErrorCode::kLengthMismatch,
                "label vector '" + labels.category +
                    "' is not aligned with the score table");
  }
}

std::vector<Trial> PrepareTrials(const ScoreTable& table,
                                 const LabelVector& labels,
                                 const ReferenceProtocol& protocol,
                                 ProtocolInfo* info) {
  RequireCanonical(table);
  RequireAligned(table, labels);
  std::vector<Trial> trials;
  if (const auto* held = std::get_if<HeldOutProtocol>(&protocol)) {
    if (!held->reference) {
      throw Error(ErrorCode::kInvalidArgument, "held-out protocol without a reference set");
    }
    if (held->reference->detectors() != table.detectors()) {
      throw Error(ErrorCode::kDetectorSetMismatch,
                  "held-out reference detectors differ from the score table");
    }
    if (!labels.has_both_classes()) {
      throw Error(ErrorCode::kDegenerateLabels,
                  "category '" + labels.category + "' lacks a positive or a negative");
    }
    info->mode = "held-out";
    info->num_splits = 1;
    info->held_out = held->label;
    info->reference_size = held->reference->size();
    info->evaluation_partition = "full-table";
    trials.push_back({held->reference, std::make_shared<ScoreTable>(table),
                      labels, 0, true});
    return trials;
  }

  const auto& splits = std::get<RepeatedSplitsProtocol>(protocol);
  if (splits.repeats < 1) {
    throw Error(ErrorCode::kInvalidArgument, "repeats must be >= 1");
  }
  info->mode = "repeated-splits";
  info->num_splits = static_cast<size_t>(splits.repeats);
  info->ratio = splits.ratio;
  info->seed = splits.seed;
  info->reference_size = ReferenceRowCount(table.num_samples(), splits.ratio);
  info->evaluation_partition = "split-remainder";
  info->resampled_splits = 0;
  for (int r = 0; r < splits.repeats; ++r) {
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxResampleAttempts; ++attempt) {
      const uint64_t split_seed =
          DeriveSeed(splits.seed, static_cast<uint64_t>(r),
                     static_cast<uint64_t>(attempt));
      CalibrationSplit split =
          SampleCalibrationSplit(table, splits.ratio, split_seed);
      LabelVector eval_labels = labels.SelectRows(split.evaluation_rows);
      if (!eval_labels.has_both_classes()) {
        ++info->resampled_splits;
        continue;
      }
      trials.push_back(
          {std::make_shared<ReferenceSet>(std::move(split.reference)),
           std::make_shared<ScoreTable>(std::move(split.evaluation)),
           std::move(eval_labels), split_seed, false});
      accepted = true;
      break;
    }
    if (!accepted) {
      throw Error(ErrorCode::kResampleExhausted,
                  "could not draw a split with both label classes in the "
                  "evaluation part after " +
                      std::to_string(kMaxResampleAttempts) + " attempts");
    }
  }
  return trials;
}

AggregateConfig ConfigForTrial(const AggregateConfig& config,
                               const Trial& trial) {
  AggregateConfig out = config;
  if (out.forest_params && !trial.held_out) {
    out.forest_params->seed = DeriveSeed(config.forest_params->seed,
                                         trial.split_seed);
  }
  return out;
}

std::vector<double> ScoreMethod(const Trial& trial,
                                const CalibrationStats& stats,
                                const AggregateConfig& config) {
  const AggregateConfig cfg = ConfigForTrial(config, trial);
  if (cfg.method == AggregationMethod::kIsolationForest) {
    const IsolationForestModel forest = FitIsolationForest(
        *trial.reference, cfg.detector_subset, *cfg.forest_params);
    return AggregateScores(*trial.evaluation, stats, cfg, &forest);
  }
  return AggregateScores(*trial.evaluation, stats, cfg);
}

std::vector<std::vector<size_t>> Combinations(size_t k, size_t n) {
  std::vector<std::vector<size_t>> out;
  std::vector<size_t> cur(n);
  for (size_t i = 0; i < n; ++i) cur[i] = i;
  for (;;) {
    out.push_back(cur);
    size_t i = n;
    while (i > 0 && cur[i - 1] == k - n + (i - 1)) --i;
    if (i == 0) break;
    ++cur[i - 1];
    for (size_t j = i; j < n; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

}  // namespace

std::string_view GroupName(MethodGroup group) {
  switch (group) {
    case MethodGroup::kSingle: return "single";
    case MethodGroup::kExternal: return "external";
    case MethodGroup::kModelBased: return "model-based";
    case MethodGroup::kAll: return "all";
  }
  return "all";
}

MethodGroup ParseGroup(std::string_view text) {
  for (auto g : {MethodGroup::kSingle, MethodGroup::kExternal,
                 MethodGroup::kModelBased, MethodGroup::kAll}) {
    if (text == GroupName(g)) return g;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown detector group '" + std::string(text) + "'");
}

std::vector<MethodSpec> BuildMethodGrid(
    const DetectorManifest& manifest, std::span<const std::string> detectors,
    std::span<const AggregationMethod> methods, const ForestParams& forest) {
  std::vector<std::pair<MethodGroup, std::vector<std::string>>> groups;
  std::vector<std::string> external;
  std::vector<std::string> model_based;
  for (const auto& d : detectors) {
    (manifest.Get(d).detector_class == DetectorClass::kExternal ? external
                                                                : model_based)
        .push_back(d);
  }
  groups.emplace_back(MethodGroup::kExternal, std::move(external));
  groups.emplace_back(MethodGroup::kModelBased, std::move(model_based));
  groups.emplace_back(MethodGroup::kAll,
                      std::vector<std::string>(detectors.begin(), detectors.end()));
  std::vector<MethodSpec> specs;
  for (const auto& [group, subset] : groups) {
    if (subset.size() < 2) continue;
    for (AggregationMethod m : methods) {
      MethodSpec spec;
      spec.name = std::string(MethodDisplayName(m));
      spec.group = group;
      spec.config.method = m;
      spec.config.detector_subset = subset;
      if (m == AggregationMethod::kIsolationForest) {
        spec.config.forest_params = forest;
      }
      specs.push_back(std::move(spec));
    }
  }
  return specs;
}

MetricSummary Summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size()));
  }
  return s;
}

const EvalRow* EvalReport::Find(std::string_view method_name,
                                MethodGroup group) const {
  for (const auto& row : rows) {
    if (row.method_name == method_name && row.group == group) return &row;
  }
  return nullptr;
}

EvalReport EvaluateProtocol(const ScoreTable& table, const LabelVector& labels,
                            const DetectorManifest& manifest,
                            const ReferenceProtocol& protocol,
                            std::span<const MethodSpec> methods,
                            const ExperimentOptions& options) {
  EvalReport report;
  report.category = labels.category;
  const std::vector<Trial> trials =
      PrepareTrials(table, labels, protocol, &report.protocol);
  for (const auto& spec : methods) spec.config.Validate(table.detectors());

  const size_t k = table.num_detectors();
  const size_t num_jobs = k + methods.size();
  const size_t num_trials = trials.size();

  std::vector<std::optional<CalibrationStats>> stats(num_trials);
  for (size_t t = 0; t < num_trials; ++t) {
    stats[t] = FitCalibration(*trials[t].reference, options.calibration);
  }

  std::vector<MetricPair> results(num_jobs * num_trials);
  ParallelFor(results.size(), options.threads, [&](size_t item) {
    const size_t job = item / num_trials;
    const size_t t = item % num_trials;
    const Trial& trial = trials[t];
    if (job < k) {
      const std::vector<double> scores = trial.evaluation->column(job);
      results[item] = Measure(scores, trial.labels, options.target_tpr);
    } else {
      const std::vector<double> scores =
          ScoreMethod(trial, *stats[t], methods[job - k].config);
      results[item] = Measure(scores, trial.labels, options.target_tpr);
    }
  });

  auto summarize_job = [&](size_t job, EvalRow* row) {
    std::vector<double> auroc(num_trials);
    std::vector<double> fpr(num_trials);
    for (size_t t = 0; t < num_trials; ++t) {
      auroc[t] = results[job * num_trials + t].auroc;
      fpr[t] = results[job * num_trials + t].fpr;
    }
    row->auroc = Summarize(auroc);
    row->fpr = Summarize(fpr);
  };

  for (size_t c = 0; c < k; ++c) {
    const DetectorInfo& info = manifest.Get(table.detectors()[c]);
    EvalRow row;
    row.method_name = info.display_name;
    row.group = MethodGroup::kSingle;
    row.detector_class = info.detector_class;
    row.detectors = {info.id};
    summarize_job(c, &row);
    report.rows.push_back(std::move(row));
  }

  // Best single detector by mean AUROC; first in column order on ties.
  auto best_single = [&](std::optional<DetectorClass> cls) {
    std::optional<size_t> best;
    for (size_t c = 0; c < k; ++c) {
      const EvalRow& row = report.rows[c];
      if (cls && row.detector_class != cls) continue;
      if (!best || row.auroc.mean > report.rows[*best].auroc.mean) best = c;
    }
    return best;
  };
  const size_t best_overall = *best_single(std::nullopt);
  const auto best_external = best_single(DetectorClass::kExternal);
  const auto best_model = best_single(DetectorClass::kModelBased);

  for (size_t m = 0; m < methods.size(); ++m) {
    EvalRow row;
    row.method_name = methods[m].name;
    row.group = methods[m].group;
    row.detectors = methods[m].config.detector_subset;
    summarize_job(k + m, &row);
    report.rows.push_back(std::move(row));
  }

  for (auto& row : report.rows) {
    size_t ref = best_overall;
    if (row.group == MethodGroup::kExternal && best_external) ref = *best_external;
    if (row.group == MethodGroup::kModelBased && best_model) ref = *best_model;
    const EvalRow& best = report.rows[ref];
    row.best_single = best.detectors.front();
    row.delta_auroc = row.auroc.mean - best.auroc.mean;
    row.delta_fpr = row.fpr.mean - best.fpr.mean;
  }
  return report;
}

std::vector<EvalReport> PerCategoryReport(
    const ScoreTable& table, std::span<const LabelVector> all_labels,
    const DetectorManifest& manifest, const ReferenceProtocol& protocol,
    std::span<const MethodSpec> methods, const ExperimentOptions& options) {
  std::vector<EvalReport> reports;
  reports.reserve(all_labels.size());
  for (const auto& labels : all_labels) {
    reports.push_back(
        EvaluateProtocol(table, labels, manifest, protocol, methods, options));
  }
  return reports;
}

SubsetSearchResult SubsetSearch(const ScoreTable& table,
                                const LabelVector& labels,
                                const DetectorManifest& manifest,
                                const ReferenceProtocol& protocol,
                                AggregationMethod method, size_t max_n,
                                const ExperimentOptions& options) {
  const bool literal = method == AggregationMethod::kEq1Literal;
  if (method != AggregationMethod::kStareSum && !literal) {
    throw Error(ErrorCode::kInvalidArgument,
                "subset search supports stare-sum and eq1-literal only");
  }
  const size_t k = table.num_detectors();
  if (k > kMaxSubsetSearchDetectors) {
    throw Error(ErrorCode::kTooManyDetectors,
                "exhaustive subset search is limited to " +
                    std::to_string(kMaxSubsetSearchDetectors) + " detectors");
  }
  for (const auto& d : table.detectors()) manifest.Get(d);
  if (max_n == 0) max_n = k;
  if (max_n > k) {
    throw Error(ErrorCode::kInvalidArgument,
                "max subset size exceeds the number of detectors");
  }

  SubsetSearchResult result;
  result.category = labels.category;
  const std::vector<Trial> trials =
      PrepareTrials(table, labels, protocol, &result.protocol);
  std::vector<ScoreTable> normalized;
  normalized.reserve(trials.size());
  for (const auto& trial : trials) {
    normalized.push_back(NormalizeTable(
        *trial.evaluation, FitCalibration(*trial.reference, options.calibration)));
  }

  for (size_t n = 1; n <= max_n; ++n) {
    const std::vector<std::vector<size_t>> combos = Combinations(k, n);
    std::vector<SubsetResult> candidates(combos.size());
    ParallelFor(combos.size(), options.threads, [&](size_t i) {
      const std::vector<size_t>& cols = combos[i];
      std::vector<double> auroc(trials.size());
      std::vector<double> fpr(trials.size());
      std::vector<double> buf(n);
      std::vector<double> raw(n);
      for (size_t t = 0; t < trials.size(); ++t) {
        const ScoreTable& norm = normalized[t];
        std::vector<double> scores(norm.num_samples());
        for (size_t r = 0; r < scores.size(); ++r) {
          for (size_t j = 0; j < n; ++j) buf[j] = norm.at(r, cols[j]);
          if (literal) {
            for (size_t j = 0; j < n; ++j) {
              raw[j] = trials[t].evaluation->at(r, cols[j]);
            }
            scores[r] = AggregateEq1Literal(buf, raw);
          } else {
            scores[r] = AggregateStare(buf);
          }
        }
        const MetricPair m = Measure(scores, trials[t].labels, options.target_tpr);
        auroc[t] = m.auroc;
        fpr[t] = m.fpr;
      }
      SubsetResult& out = candidates[i];
      out.size = n;
      for (size_t c : cols) out.best_subset.push_back(table.detectors()[c]);
      out.auroc = Summarize(auroc);
      out.fpr = Summarize(fpr);
      out.search_space = combos.size();
    });
    size_t best = 0;
    for (size_t i = 1; i < candidates.size(); ++i) {
      if (candidates[i].auroc.mean > candidates[best].auroc.mean) best = i;
    }
    result.rows.push_back(std::move(candidates[best]));
  }
  return result;
}

std::vector<SweepRow> ReferenceSizeSweep(const ScoreTable& table,
                                         const LabelVector& labels,
                                         const DetectorManifest& manifest,
                                         const ReferenceSet& held_out,
                                         std::span<const size_t> sizes,
                                         int repeats, uint64_t seed,
                                         const ForestParams& forest,
                                         const ExperimentOptions& options) {
  RequireCanonical(table);
  RequireAligned(table, labels);
  for (const auto& d : table.detectors()) manifest.Get(d);
  if (held_out.detectors() != table.detectors()) {
    throw Error(ErrorCode::kDetectorSetMismatch,
                "held-out reference detectors differ from the score table");
  }
  if (repeats < 1) {
    throw Error(ErrorCode::kInvalidArgument, "repeats must be >= 1");
  }
  const size_t m = held_out.size();
  for (size_t s : sizes) {
    if (s > m) {
      throw Error(ErrorCode::kSizeExceedsHeldOut,
                  "sweep size " + std::to_string(s) +
                      " exceeds held-out size " + std::to_string(m));
    }
    if (s < 2) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sweep sizes must be at least 2 to fit an isolation forest");
    }
  }

  const std::vector<std::string>& detectors = table.detectors();
  AggregateConfig stare{AggregationMethod::kStareSum, detectors, std::nullopt};
  const size_t num_items = sizes.size() * static_cast<size_t>(repeats);
  std::vector<MetricPair> stare_results(num_items);
  std::vector<MetricPair> forest_results(num_items);
  ParallelFor(num_items, options.threads, [&](size_t item) {
    const size_t si = item / static_cast<size_t>(repeats);
    const size_t r = item % static_cast<size_t>(repeats);
    const size_t size = sizes[si];
    std::optional<ReferenceSet> subsample;
    if (size < m) {
      Rng rng(DeriveSeed(seed, size, r));
      const std::vector<size_t> rows = SampleWithoutReplacement(m, size, rng);
      subsample.emplace(held_out.table().SelectRows(rows),
                        ReferenceSource::kHeldOutFile);
    }
    const ReferenceSet& reference = subsample ? *subsample : held_out;

    const CalibrationStats stats = FitCalibration(reference, options.calibration);
    stare_results[item] = Measure(AggregateScores(table, stats, stare), labels,
                                  options.target_tpr);

    ForestParams params = forest;
    params.subsample_size =
        std::min(ResolveSubsampleSize(forest, reference.size()), reference.size());
    if (r > 0) params.seed = DeriveSeed(forest.seed, r);
    AggregateConfig cfg{AggregationMethod::kIsolationForest, detectors, params};
    const IsolationForestModel model =
        FitIsolationForest(reference, detectors, params);
    forest_results[item] = Measure(AggregateScores(table, stats, cfg, &model),
                                   labels, options.target_tpr);
  });

  std::vector<SweepRow> rows;
  auto summarize = [&](const std::vector<MetricPair>& results, size_t si,
                       AggregationMethod method) {
    std::vector<double> auroc;
    std::vector<double> fpr;
    for (size_t r = 0; r < static_cast<size_t>(repeats); ++r) {
      const MetricPair& p = results[si * static_cast<size_t>(repeats) + r];
      auroc.push_back(p.auroc);
      fpr.push_back(p.fpr);
    }
    rows.push_back({sizes[si], std::string(MethodDisplayName(method)),
                    Summarize(auroc), Summarize(fpr)});
  };
  for (size_t si = 0; si < sizes.size(); ++si) {
    summarize(stare_results, si, AggregationMethod::kStareSum);
    summarize(forest_results, si, AggregationMethod::kIsolationForest);
  }
  return rows;
}

std::vector<OrientationCheck> ValidateOrientation(const ScoreTable& canonical,
                                                  const LabelVector& labels) {
  RequireCanonical(canonical);
  RequireAligned(canonical, labels);
  std::vector<OrientationCheck> checks;
  for (size_t c = 0; c < canonical.num_detectors(); ++c) {
    const double auroc = Auroc(canonical.column(c), labels);
    checks.push_back({canonical.detectors()[c], auroc, auroc >= 0.5});
  }
  return checks;
}

}  // namespace stare
