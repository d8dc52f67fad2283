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

#include "stare/score_data.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "stare/random.h"
#include "stare/status.h"

namespace stare {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::string_view OrientationName(Orientation o) {
  return o == Orientation::kAnomalyHigh ? "anomaly-high" : "quality-high";
}

std::string_view DetectorClassName(DetectorClass c) {
  return c == DetectorClass::kExternal ? "external" : "model-based";
}

Orientation ParseOrientation(std::string_view text) {
  if (text == "anomaly-high") return Orientation::kAnomalyHigh;
  if (text == "quality-high") return Orientation::kQualityHigh;
  throw Error(ErrorCode::kManifestError,
              "unknown orientation '" + std::string(text) +
                  "' (expected anomaly-high or quality-high)");
}

DetectorClass ParseDetectorClass(std::string_view text) {
  if (text == "external") return DetectorClass::kExternal;
  if (text == "model-based") return DetectorClass::kModelBased;
  throw Error(ErrorCode::kManifestError,
              "unknown detector class '" + std::string(text) +
                  "' (expected external or model-based)");
}

DetectorManifest::DetectorManifest(std::vector<DetectorInfo> entries)
    : entries_(std::move(entries)) {
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (e.id.empty()) {
      throw Error(ErrorCode::kManifestError, "empty detector id in manifest");
    }
    if (!seen.insert(e.id).second) {
      throw Error(ErrorCode::kManifestError,
                  "duplicate detector id '" + e.id + "' in manifest");
    }
  }
}

const DetectorInfo* DetectorManifest::Find(std::string_view id) const {
  for (const auto& e : entries_) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const DetectorInfo& DetectorManifest::Get(std::string_view id) const {
  const DetectorInfo* info = Find(id);
  if (info == nullptr) {
    throw Error(ErrorCode::kMissingColumn,
                "detector '" + std::string(id) + "' is not in the manifest");
  }
  return *info;
}

std::vector<std::string> DetectorManifest::Ids() const {
  std::vector<std::string> ids;
  ids.reserve(entries_.size());
  for (const auto& e : entries_) ids.push_back(e.id);
  return ids;
}

std::vector<std::string> DetectorManifest::IdsOfClass(DetectorClass c) const {
  std::vector<std::string> ids;
  for (const auto& e : entries_) {
    if (e.detector_class == c) ids.push_back(e.id);
  }
  return ids;
}

DetectorManifest ParseManifest(std::string_view text) {
  struct Pending {
    DetectorInfo info;
    bool has_orientation = false;
    bool has_class = false;
  };
  std::vector<Pending> pending;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kManifestError,
                "manifest line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      Pending p;
      p.info.id = std::string(Trim(line.substr(1, line.size() - 2)));
      if (p.info.id.empty()) fail("empty detector id");
      p.info.display_name = p.info.id;
      pending.push_back(std::move(p));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    if (pending.empty()) fail("key outside of a [detector] section");
    const std::string_view key = Trim(line.substr(0, eq));
    const std::string_view value = Trim(line.substr(eq + 1));
    Pending& cur = pending.back();
    if (key == "display_name") {
      cur.info.display_name = std::string(value);
    } else if (key == "orientation") {
      cur.info.orientation = ParseOrientation(value);
      cur.has_orientation = true;
    } else if (key == "class") {
      cur.info.detector_class = ParseDetectorClass(value);
      cur.has_class = true;
    } else {
      fail("unknown key '" + std::string(key) + "'");
    }
  }
  std::vector<DetectorInfo> entries;
  for (auto& p : pending) {
    if (!p.has_orientation || !p.has_class) {
      throw Error(ErrorCode::kManifestError,
                  "detector '" + p.info.id +
                      "' must declare both orientation and class");
    }
    entries.push_back(std::move(p.info));
  }
  if (entries.empty()) {
    throw Error(ErrorCode::kManifestError, "manifest declares no detectors");
  }
  return DetectorManifest(std::move(entries));
}

DetectorManifest LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError,
                "cannot open manifest file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseManifest(buffer.str());
}

std::string FormatManifest(const DetectorManifest& manifest) {
  std::ostringstream out;
  for (const auto& e : manifest.entries()) {
    out << "[" << e.id << "]\n"
        << "display_name = " << e.display_name << "\n"
        << "orientation = " << OrientationName(e.orientation) << "\n"
        << "class = " << DetectorClassName(e.detector_class) << "\n\n";
  }
  return out.str();
}

ScoreTable::ScoreTable(std::vector<std::string> sample_ids,
                       std::vector<std::string> detectors,
                       std::vector<double> values, ScoreState state)
    : sample_ids_(std::move(sample_ids)),
      detectors_(std::move(detectors)),
      values_(std::move(values)),
      state_(state) {
  if (sample_ids_.empty() || detectors_.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "score table needs at least one sample and one detector");
  }
  if (values_.size() != sample_ids_.size() * detectors_.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "score table values do not match N x K");
  }
  std::unordered_set<std::string> ids;
  for (const auto& id : sample_ids_) {
    if (!ids.insert(id).second) {
      throw Error(ErrorCode::kDuplicateSampleId, "duplicate sample id '" + id + "'");
    }
  }
  std::set<std::string> dets;
  for (const auto& d : detectors_) {
    if (d.empty() || !dets.insert(d).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "detector ids must be unique and non-empty");
    }
  }
  for (size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "non-finite value at row " +
                      std::to_string(i / detectors_.size() + 1) + ", column " +
                      detectors_[i % detectors_.size()]);
    }
  }
}

std::vector<double> ScoreTable::column(size_t col) const {
  std::vector<double> out(num_samples());
  for (size_t r = 0; r < out.size(); ++r) out[r] = at(r, col);
  return out;
}

std::optional<size_t> ScoreTable::ColumnIndex(std::string_view detector) const {
  for (size_t c = 0; c < detectors_.size(); ++c) {
    if (detectors_[c] == detector) return c;
  }
  return std::nullopt;
}

size_t ScoreTable::RequireColumn(std::string_view detector) const {
  const auto idx = ColumnIndex(detector);
  if (!idx) {
    throw Error(ErrorCode::kUnknownDetector,
                "detector '" + std::string(detector) + "' is not in the table");
  }
  return *idx;
}

ScoreTable ScoreTable::SelectRows(std::span<const size_t> rows) const {
  std::vector<std::string> ids;
  std::vector<double> values;
  ids.reserve(rows.size());
  values.reserve(rows.size() * num_detectors());
  for (size_t r : rows) {
    ids.push_back(sample_ids_.at(r));
    const auto src = row(r);
    values.insert(values.end(), src.begin(), src.end());
  }
  return ScoreTable(std::move(ids), detectors_, std::move(values), state_);
}

size_t LabelVector::num_positive() const {
  return static_cast<size_t>(std::count(labels.begin(), labels.end(), 1));
}

bool LabelVector::has_both_classes() const {
  const size_t pos = num_positive();
  return pos > 0 && pos < labels.size();
}

LabelVector LabelVector::SelectRows(std::span<const size_t> rows) const {
  LabelVector out{category, {}};
  out.labels.reserve(rows.size());
  for (size_t r : rows) out.labels.push_back(labels.at(r));
  return out;
}

ReferenceSet::ReferenceSet(ScoreTable table, ReferenceSource source)
    : table_(std::move(table)), source_(source) {
  if (!table_.canonical()) {
    throw Error(ErrorCode::kNotCanonical,
                "reference sets must be built from canonical score tables");
  }
}

ScoreTable CanonicalizeOrientation(const ScoreTable& table,
                                   const DetectorManifest& manifest) {
  if (table.canonical()) {
    throw Error(ErrorCode::kAlreadyCanonical,
                "score table orientation has already been canonicalized");
  }
  const size_t k = table.num_detectors();
  std::vector<bool> negate(k);
  for (size_t c = 0; c < k; ++c) {
    negate[c] = manifest.Get(table.detectors()[c]).orientation ==
                Orientation::kQualityHigh;
  }
  std::vector<double> values = table.values();
  for (size_t i = 0; i < values.size(); ++i) {
    if (negate[i % k]) values[i] = -values[i];
  }
  return ScoreTable(table.sample_ids(), table.detectors(), std::move(values),
                    ScoreState::kCanonical);
}

size_t ReferenceRowCount(size_t num_samples, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "calibration ratio must lie strictly between 0 and 1");
  }
  return static_cast<size_t>(
      std::floor(ratio * static_cast<double>(num_samples) + 0.5));
}

CalibrationSplit SampleCalibrationSplit(const ScoreTable& table, double ratio,
                                        uint64_t seed) {
  const size_t n = table.num_samples();
  const size_t m = ReferenceRowCount(n, ratio);
  if (m == 0 || m >= n) {
    throw Error(ErrorCode::kEmptySplit,
                "calibration split of " + std::to_string(n) +
                    " rows at ratio " + std::to_string(ratio) + " leaves " +
                    (m == 0 ? "no reference rows" : "no evaluation rows"));
  }
  Rng rng(seed);
  std::vector<size_t> reference_rows = SampleWithoutReplacement(n, m, rng);
  std::vector<bool> in_reference(n, false);
  for (size_t r : reference_rows) in_reference[r] = true;
  std::vector<size_t> evaluation_rows;
  evaluation_rows.reserve(n - m);
  for (size_t r = 0; r < n; ++r) {
    if (!in_reference[r]) evaluation_rows.push_back(r);
  }
  ReferenceSet reference(table.SelectRows(reference_rows),
                         ReferenceSource::kSampledSplit);
  ScoreTable evaluation = table.SelectRows(evaluation_rows);
  return CalibrationSplit{std::move(reference), std::move(evaluation),
                          std::move(reference_rows),
                          std::move(evaluation_rows)};
}

ReferenceSet LoadReferenceSet(const std::filesystem::path& path,
                              const DetectorManifest& manifest,
                              TableFormat format) {
  LoadedScores loaded = LoadScoreTable(path, manifest, format);
  return ReferenceSet(CanonicalizeOrientation(loaded.table, manifest),
                      ReferenceSource::kHeldOutFile);
}

}  // namespace stare
