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

#ifndef STARE_SCORE_DATA_H_
#define STARE_SCORE_DATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stare/status.h"

namespace stare {

// Direction of a raw detector score.
enum class Orientation {
  kAnomalyHigh,  // Larger raw score means more likely hallucinated.
  kQualityHigh,  // Larger raw score means better translation.
};

enum class DetectorClass { kExternal, kModelBased };

std::string_view OrientationName(Orientation o);
std::string_view DetectorClassName(DetectorClass c);
Orientation ParseOrientation(std::string_view text);
DetectorClass ParseDetectorClass(std::string_view text);

struct DetectorInfo {
  std::string id;
  std::string display_name;
  Orientation orientation = Orientation::kAnomalyHigh;
  DetectorClass detector_class = DetectorClass::kExternal;
};

class DetectorManifest {
 public:
  DetectorManifest() = default;
  // Throws kManifestError on empty or duplicate ids.
  explicit DetectorManifest(std::vector<DetectorInfo> entries);

  const std::vector<DetectorInfo>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

  const DetectorInfo* Find(std::string_view id) const;
  // Throws kMissingColumn when absent.
  const DetectorInfo& Get(std::string_view id) const;

  std::vector<std::string> Ids() const;
  std::vector<std::string> IdsOfClass(DetectorClass c) const;

 private:
  std::vector<DetectorInfo> entries_;
};

// Parses the INI-style manifest format:
//
//   [labse]
//   display_name = LaBSE
//   orientation = quality-high
//   class = external
//
// Lines starting with '#' or ';' are comments.
DetectorManifest ParseManifest(std::string_view text);
DetectorManifest LoadManifest(const std::filesystem::path& path);
std::string FormatManifest(const DetectorManifest& manifest);

enum class ScoreState {
  kRaw,         // As read from disk.
  kCanonical,   // Oriented so that larger means more hallucinated.
  kNormalized,  // Canonical and min-max normalized against a reference.
};

// N samples x K detectors, stored row-major.
class ScoreTable {
 public:
  // Validates the shape, unique sample ids, unique detector ids and that
  // every value is finite.
  ScoreTable(std::vector<std::string> sample_ids,
             std::vector<std::string> detectors, std::vector<double> values,
             ScoreState state = ScoreState::kRaw);

  size_t num_samples() const { return sample_ids_.size(); }
  size_t num_detectors() const { return detectors_.size(); }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  const std::vector<std::string>& detectors() const { return detectors_; }
  const std::vector<double>& values() const { return values_; }
  ScoreState state() const { return state_; }
  bool canonical() const { return state_ != ScoreState::kRaw; }
  bool normalized() const { return state_ == ScoreState::kNormalized; }

  double at(size_t row, size_t col) const {
    return values_[row * detectors_.size() + col];
  }
  std::span<const double> row(size_t r) const {
    return {values_.data() + r * detectors_.size(), detectors_.size()};
  }
  std::vector<double> column(size_t col) const;

  std::optional<size_t> ColumnIndex(std::string_view detector) const;
  // Throws kUnknownDetector when absent.
  size_t RequireColumn(std::string_view detector) const;

  ScoreTable SelectRows(std::span<const size_t> rows) const;

 private:
  std::vector<std::string> sample_ids_;
  std::vector<std::string> detectors_;
  std::vector<double> values_;
  ScoreState state_;
};

// Binary ground truth for one category, aligned with a ScoreTable's rows.
struct LabelVector {
  std::string category;
  std::vector<uint8_t> labels;

  size_t num_positive() const;
  size_t num_negative() const { return labels.size() - num_positive(); }
  bool has_both_classes() const;
  LabelVector SelectRows(std::span<const size_t> rows) const;
};

enum class ReferenceSource { kHeldOutFile, kSampledSplit };

// Unlabeled calibration sample. Only canonical tables are accepted.
class ReferenceSet {
 public:
  ReferenceSet(ScoreTable table, ReferenceSource source);

  const ScoreTable& table() const { return table_; }
  const std::vector<std::string>& detectors() const {
    return table_.detectors();
  }
  size_t size() const { return table_.num_samples(); }
  ReferenceSource source() const { return source_; }

 private:
  ScoreTable table_;
  ReferenceSource source_;
};

enum class TableFormat { kCsv, kTsv, kJsonLines };

std::string_view TableFormatName(TableFormat format);
TableFormat ParseTableFormat(std::string_view text);
// Picks a format from the file extension (.csv, .tsv, .jsonl/.ndjson).
TableFormat FormatFromExtension(const std::filesystem::path& path);

struct CellRef {
  size_t row;  // 1-based data row.
  std::string column;
};

// Raised when a load finds NaN, infinite or blank score cells; lists every
// offending cell rather than only the first.
class NonFiniteValueError : public Error {
 public:
  explicit NonFiniteValueError(std::vector<CellRef> cells);
  const std::vector<CellRef>& cells() const { return cells_; }

 private:
  std::vector<CellRef> cells_;
};

struct LoadedScores {
  ScoreTable table;
  std::vector<LabelVector> labels;
};

// Reads a score file. Columns are reordered to manifest order; values are
// left in their raw orientation. Data rows in error messages are 1-based.
LoadedScores ParseScoreTable(std::istream& in, const DetectorManifest& manifest,
                             TableFormat format);
LoadedScores LoadScoreTable(const std::filesystem::path& path,
                            const DetectorManifest& manifest,
                            TableFormat format);

// Writes values with the shortest round-trip representation.
void WriteScoreTable(std::ostream& out, const ScoreTable& table,
                     std::span<const LabelVector> labels, TableFormat format);
void SaveScoreTable(const std::filesystem::path& path, const ScoreTable& table,
                    std::span<const LabelVector> labels, TableFormat format);

// Negates quality-high columns. Refuses tables that are already canonical.
ScoreTable CanonicalizeOrientation(const ScoreTable& table,
                                   const DetectorManifest& manifest);

struct CalibrationSplit {
  ReferenceSet reference;
  ScoreTable evaluation;
  std::vector<size_t> reference_rows;   // Indices into the input table.
  std::vector<size_t> evaluation_rows;  // Ascending.
};

// Number of reference rows for a ratio, rounding half up.
size_t ReferenceRowCount(size_t num_samples, double ratio);

// Draws round(ratio * N) rows uniformly without replacement as the reference
// part; the remaining rows keep their original order.
CalibrationSplit SampleCalibrationSplit(const ScoreTable& table, double ratio,
                                        uint64_t seed);

// Loads a held-out reference file (labels, if any, are ignored) and
// canonicalizes it.
ReferenceSet LoadReferenceSet(const std::filesystem::path& path,
                              const DetectorManifest& manifest,
                              TableFormat format);

}  // namespace stare

#endif  // STARE_SCORE_DATA_H_
