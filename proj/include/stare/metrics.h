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

#ifndef STARE_METRICS_H_
#define STARE_METRICS_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "stare/score_data.h"

namespace stare {

// Operating points of the decision rule "flag if score > threshold".
// thresholds[0] is +inf (nothing flagged); the last threshold is -inf
// (everything flagged). Point i > 0 flags every tie block above
// thresholds[i].
struct RocCurve {
  std::vector<double> thresholds;
  std::vector<double> tpr;
  std::vector<double> fpr;

  size_t size() const { return thresholds.size(); }
  double TrapezoidalArea() const;
};

// P(s+ > s-) + 1/2 P(s+ = s-). Throws kDegenerateLabels unless both classes
// are present, kLengthMismatch if sizes differ.
double Auroc(std::span<const double> scores, std::span<const uint8_t> labels);
double Auroc(std::span<const double> scores, const LabelVector& labels);

// Smallest FPR among achievable operating points with TPR >= target.
double FprAtTpr(std::span<const double> scores, std::span<const uint8_t> labels,
                double target_tpr = 0.9);
double FprAtTpr(std::span<const double> scores, const LabelVector& labels,
                double target_tpr = 0.9);

RocCurve ComputeRocCurve(std::span<const double> scores,
                         std::span<const uint8_t> labels);
RocCurve ComputeRocCurve(std::span<const double> scores,
                         const LabelVector& labels);

// CSV with header "threshold,tpr,fpr"; sentinels are written as inf/-inf.
void WriteRocCsv(std::ostream& out, const RocCurve& curve);

}  // namespace stare

#endif  // STARE_METRICS_H_
