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

#ifndef STARE_NORMALIZATION_H_
#define STARE_NORMALIZATION_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlohmann/json.hpp"
#include "stare/score_data.h"

namespace stare {

struct DetectorRange {
  double min_ref = 0.0;
  double max_ref = 0.0;
  bool degenerate = false;  // min_ref == max_ref
};

// Non-default calibration variants, kept for sensitivity checks. The default
// is exact min/max without clamping.
struct CalibrationOptions {
  // When set, the lower and upper reference quantiles (linear interpolation
  // between order statistics) replace the exact min and max.
  std::optional<std::pair<double, double>> quantiles;
  // Clamp normalized values to [0, 1].
  bool clamp = false;
};

// Per-detector min/max of the reference set.
class CalibrationStats {
 public:
  CalibrationStats(std::vector<std::string> detectors,
                   std::vector<DetectorRange> ranges, size_t source_size,
                   bool clamp = false);

  const std::vector<std::string>& detectors() const { return detectors_; }
  const std::vector<DetectorRange>& ranges() const { return ranges_; }
  size_t source_size() const { return source_size_; }
  bool clamp() const { return clamp_; }

  // Throws kUnknownDetector.
  const DetectorRange& Range(std::string_view detector) const;
  std::optional<size_t> Index(std::string_view detector) const;

  nlohmann::ordered_json ToJson() const;
  static CalibrationStats FromJson(const nlohmann::ordered_json& j);

 private:
  std::vector<std::string> detectors_;
  std::vector<DetectorRange> ranges_;
  size_t source_size_;
  bool clamp_;
};

// Column-wise min and max of the reference set. Emits one warning per
// constant column.
CalibrationStats FitCalibration(const ReferenceSet& reference,
                                const CalibrationOptions& options = {});

// (score - min) / (max - min). Not clamped unless the stats request it;
// constant detectors map to 0.
double NormalizeValue(double score, const DetectorRange& range,
                      bool clamp = false);
double Normalize(double score, std::string_view detector,
                 const CalibrationStats& stats);

// Element-wise normalization of a canonical table. The table's detector set
// must equal the stats' detector set (order may differ).
ScoreTable NormalizeTable(const ScoreTable& table,
                          const CalibrationStats& stats);

}  // namespace stare

#endif  // STARE_NORMALIZATION_H_
