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

#include "stare/normalization.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "stare/log.h"
#include "stare/status.h"

namespace stare {
namespace {

// Linear interpolation between order statistics; `sorted` is ascending.
double Quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

CalibrationStats::CalibrationStats(std::vector<std::string> detectors,
                                   std::vector<DetectorRange> ranges,
                                   size_t source_size, bool clamp)
    : detectors_(std::move(detectors)),
      ranges_(std::move(ranges)),
      source_size_(source_size),
      clamp_(clamp) {
  if (detectors_.size() != ranges_.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "calibration stats need one range per detector");
  }
  for (size_t i = 0; i < ranges_.size(); ++i) {
    const DetectorRange& r = ranges_[i];
    if (!(r.min_ref <= r.max_ref) ||
        r.degenerate != (r.min_ref == r.max_ref)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "inconsistent calibration range for " + detectors_[i]);
    }
  }
}

std::optional<size_t> CalibrationStats::Index(std::string_view detector) const {
  for (size_t i = 0; i < detectors_.size(); ++i) {
    if (detectors_[i] == detector) return i;
  }
  return std::nullopt;
}

const DetectorRange& CalibrationStats::Range(std::string_view detector) const {
  const auto idx = Index(detector);
  if (!idx) {
    throw Error(ErrorCode::kUnknownDetector,
                "no calibration statistics for detector '" +
                    std::string(detector) + "'");
  }
  return ranges_[*idx];
}

nlohmann::ordered_json CalibrationStats::ToJson() const {
  nlohmann::ordered_json detectors = nlohmann::ordered_json::object();
  for (size_t i = 0; i < detectors_.size(); ++i) {
    detectors[detectors_[i]] = {{"min", ranges_[i].min_ref},
                                {"max", ranges_[i].max_ref},
                                {"degenerate", ranges_[i].degenerate}};
  }
  nlohmann::ordered_json out;
  out["source_size"] = source_size_;
  out["clamp"] = clamp_;
  out["detectors"] = std::move(detectors);
  return out;
}

CalibrationStats CalibrationStats::FromJson(const nlohmann::ordered_json& j) {
  try {
    std::vector<std::string> detectors;
    std::vector<DetectorRange> ranges;
    for (const auto& [id, r] : j.at("detectors").items()) {
      detectors.push_back(id);
      ranges.push_back({r.at("min").get<double>(), r.at("max").get<double>(),
                        r.at("degenerate").get<bool>()});
    }
    return CalibrationStats(std::move(detectors), std::move(ranges),
                            j.at("source_size").get<size_t>(),
                            j.value("clamp", false));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError,
                std::string("malformed calibration document: ") + e.what());
  }
}

CalibrationStats FitCalibration(const ReferenceSet& reference,
                                const CalibrationOptions& options) {
  const ScoreTable& table = reference.table();
  if (options.quantiles) {
    const auto [lo, hi] = *options.quantiles;
    if (!(0.0 <= lo && lo < hi && hi <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "calibration quantiles must satisfy 0 <= lo < hi <= 1");
    }
  }
  std::vector<DetectorRange> ranges(table.num_detectors());
  for (size_t c = 0; c < table.num_detectors(); ++c) {
    DetectorRange& r = ranges[c];
    if (options.quantiles) {
      std::vector<double> col = table.column(c);
      std::sort(col.begin(), col.end());
      r.min_ref = Quantile(col, options.quantiles->first);
      r.max_ref = Quantile(col, options.quantiles->second);
    } else {
      r.min_ref = r.max_ref = table.at(0, c);
      for (size_t row = 1; row < table.num_samples(); ++row) {
        const double v = table.at(row, c);
        r.min_ref = std::min(r.min_ref, v);
        r.max_ref = std::max(r.max_ref, v);
      }
    }
    r.degenerate = r.min_ref == r.max_ref;
    if (r.degenerate) {
      Warn("detector '" + table.detectors()[c] +
           "' is constant on the reference set; its normalized score is 0");
    }
  }
  return CalibrationStats(table.detectors(), std::move(ranges),
                          table.num_samples(), options.clamp);
}

double NormalizeValue(double score, const DetectorRange& range, bool clamp) {
  if (range.degenerate) return 0.0;
  const double w = (score - range.min_ref) / (range.max_ref - range.min_ref);
  return clamp ? std::clamp(w, 0.0, 1.0) : w;
}

double Normalize(double score, std::string_view detector,
                 const CalibrationStats& stats) {
  return NormalizeValue(score, stats.Range(detector), stats.clamp());
}

ScoreTable NormalizeTable(const ScoreTable& table,
                          const CalibrationStats& stats) {
  if (!table.canonical()) {
    throw Error(ErrorCode::kNotCanonical,
                "normalization expects a canonical score table");
  }
  const std::set<std::string> table_set(table.detectors().begin(),
                                        table.detectors().end());
  const std::set<std::string> stats_set(stats.detectors().begin(),
                                        stats.detectors().end());
  if (table_set != stats_set) {
    throw Error(ErrorCode::kDetectorSetMismatch,
                "table detectors do not match calibration detectors");
  }
  const size_t k = table.num_detectors();
  std::vector<const DetectorRange*> ranges(k);
  for (size_t c = 0; c < k; ++c) ranges[c] = &stats.Range(table.detectors()[c]);
  std::vector<double> values = table.values();
  for (size_t i = 0; i < values.size(); ++i) {
    values[i] = NormalizeValue(values[i], *ranges[i % k], stats.clamp());
  }
  return ScoreTable(table.sample_ids(), table.detectors(), std::move(values),
                    ScoreState::kNormalized);
}

}  // namespace stare
