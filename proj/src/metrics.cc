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

#include "stare/metrics.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "stare/status.h"

namespace stare {
namespace {

struct TieBlock {
  double value;
  int64_t positives;
  int64_t negatives;
};

struct ClassCounts {
  int64_t positives = 0;
  int64_t negatives = 0;
};

ClassCounts CheckInputs(std::span<const double> scores,
                        std::span<const uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "scores and labels differ in length");
  }
  ClassCounts counts;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw Error(ErrorCode::kNonFiniteValue, "non-finite score in metric input");
    }
    if (labels[i] > 1) {
      throw Error(ErrorCode::kInvalidArgument, "labels must be 0 or 1");
    }
    (labels[i] ? counts.positives : counts.negatives) += 1;
  }
  if (counts.positives == 0 || counts.negatives == 0) {
    throw Error(ErrorCode::kDegenerateLabels,
                "metric needs at least one positive and one negative label");
  }
  return counts;
}

// Distinct score values in descending order with class counts per value.
std::vector<TieBlock> DescendingTieBlocks(std::span<const double> scores,
                                          std::span<const uint8_t> labels) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  std::vector<TieBlock> blocks;
  for (size_t idx : order) {
    if (blocks.empty() || blocks.back().value != scores[idx]) {
      blocks.push_back({scores[idx], 0, 0});
    }
    (labels[idx] ? blocks.back().positives : blocks.back().negatives) += 1;
  }
  return blocks;
}

std::string FormatThreshold(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

double RocCurve::TrapezoidalArea() const {
  double area = 0.0;
  for (size_t i = 1; i < size(); ++i) {
    area += (fpr[i] - fpr[i - 1]) * (tpr[i] + tpr[i - 1]) * 0.5;
  }
  return area;
}

double Auroc(std::span<const double> scores, std::span<const uint8_t> labels) {
  const ClassCounts counts = CheckInputs(scores, labels);
  // Twice the Mann-Whitney U statistic, kept in integers so the result is
  // the exact rational wins / pairs rounded once.
  int64_t twice_wins = 0;
  int64_t negatives_below = counts.negatives;
  for (const TieBlock& b : DescendingTieBlocks(scores, labels)) {
    negatives_below -= b.negatives;
    twice_wins += 2 * b.positives * negatives_below + b.positives * b.negatives;
  }
  return static_cast<double>(twice_wins) /
         (2.0 * static_cast<double>(counts.positives) *
          static_cast<double>(counts.negatives));
}

double Auroc(std::span<const double> scores, const LabelVector& labels) {
  return Auroc(scores, std::span<const uint8_t>(labels.labels));
}

double FprAtTpr(std::span<const double> scores, std::span<const uint8_t> labels,
                double target_tpr) {
  if (!(target_tpr > 0.0 && target_tpr <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "target TPR must lie in (0, 1]");
  }
  const ClassCounts counts = CheckInputs(scores, labels);
  int64_t tp = 0;
  int64_t fp = 0;
  for (const TieBlock& b : DescendingTieBlocks(scores, labels)) {
    tp += b.positives;
    fp += b.negatives;
    if (static_cast<double>(tp) / static_cast<double>(counts.positives) >=
        target_tpr) {
      return static_cast<double>(fp) / static_cast<double>(counts.negatives);
    }
  }
  return 1.0;
}

double FprAtTpr(std::span<const double> scores, const LabelVector& labels,
                double target_tpr) {
  return FprAtTpr(scores, std::span<const uint8_t>(labels.labels), target_tpr);
}

RocCurve ComputeRocCurve(std::span<const double> scores,
                         std::span<const uint8_t> labels) {
  const ClassCounts counts = CheckInputs(scores, labels);
  const std::vector<TieBlock> blocks = DescendingTieBlocks(scores, labels);
  const double inf = std::numeric_limits<double>::infinity();
  RocCurve curve;
  curve.thresholds.push_back(inf);
  curve.tpr.push_back(0.0);
  curve.fpr.push_back(0.0);
  int64_t tp = 0;
  int64_t fp = 0;
  for (size_t i = 0; i < blocks.size(); ++i) {
    tp += blocks[i].positives;
    fp += blocks[i].negatives;
    curve.thresholds.push_back(i + 1 < blocks.size() ? blocks[i + 1].value
                                                     : -inf);
    curve.tpr.push_back(static_cast<double>(tp) /
                        static_cast<double>(counts.positives));
    curve.fpr.push_back(static_cast<double>(fp) /
                        static_cast<double>(counts.negatives));
  }
  return curve;
}

RocCurve ComputeRocCurve(std::span<const double> scores,
                         const LabelVector& labels) {
  return ComputeRocCurve(scores, std::span<const uint8_t>(labels.labels));
}

void WriteRocCsv(std::ostream& out, const RocCurve& curve) {
  out << "threshold,tpr,fpr\n";
  for (size_t i = 0; i < curve.size(); ++i) {
    out << FormatThreshold(curve.thresholds[i]) << ","
        << FormatThreshold(curve.tpr[i]) << "," << FormatThreshold(curve.fpr[i])
        << "\n";
  }
}

}  // namespace stare
