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

// Reading and writing score tables in CSV, TSV and JSON-lines form.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "nlohmann/json.hpp"
#include "stare/score_data.h"
#include "stare/status.h"

namespace stare {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kLabelPrefix = "is_";

bool IsLabelColumn(std::string_view name) {
  return name.size() > kLabelPrefix.size() && name.starts_with(kLabelPrefix);
}

std::string_view TrimView(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> SplitDelimited(std::string_view line, char delim,
                                        size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delim) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) {
    throw Error(ErrorCode::kParseError,
                "line " + std::to_string(line_no) + ": unterminated quote");
  }
  fields.push_back(std::move(cur));
  return fields;
}

enum class CellStatus { kOk, kNonFinite, kMalformed };

CellStatus ParseScoreCell(std::string_view text, double* out) {
  text = TrimView(text);
  if (text.empty()) return CellStatus::kNonFinite;
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    if (res.ec == std::errc::result_out_of_range) return CellStatus::kNonFinite;
    return CellStatus::kMalformed;
  }
  if (!std::isfinite(v)) return CellStatus::kNonFinite;
  *out = v;
  return CellStatus::kOk;
}

uint8_t ParseLabelCell(std::string_view text, size_t row,
                       const std::string& column) {
  text = TrimView(text);
  if (text == "0") return 0;
  if (text == "1") return 1;
  throw Error(ErrorCode::kParseError,
              "row " + std::to_string(row) + ", label column " + column +
                  ": expected 0 or 1, got '" + std::string(text) + "'");
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string QuoteField(const std::string& field, char delim) {
  if (field.find_first_of(std::string{delim, '"', '\n', '\r'}) ==
      std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void CheckManifestCoverage(const std::set<std::string>& present,
                           const DetectorManifest& manifest) {
  std::vector<std::string> missing;
  for (const auto& e : manifest.entries()) {
    if (!present.count(e.id)) missing.push_back(e.id);
  }
  if (!missing.empty()) {
    std::string msg = "missing detector column(s):";
    for (const auto& m : missing) msg += " " + m;
    throw Error(ErrorCode::kMissingColumn, msg);
  }
}

LoadedScores ParseDelimited(std::istream& in, const DetectorManifest& manifest,
                            char delim) {
  std::string line;
  size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!TrimView(line).empty()) {
      header = SplitDelimited(line, delim, line_no);
      break;
    }
  }
  if (header.empty()) {
    throw Error(ErrorCode::kParseError, "score file is empty");
  }
  for (auto& h : header) h = std::string(TrimView(h));
  if (header.front() != "id") {
    throw Error(ErrorCode::kParseError,
                "first column must be 'id', got '" + header.front() + "'");
  }

  // Column position of each manifest detector, and of each label category.
  std::map<std::string, size_t> detector_pos;
  std::vector<std::pair<std::string, size_t>> label_pos;
  std::set<std::string> seen;
  for (size_t c = 1; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::kParseError, "duplicate column '" + name + "'");
    }
    if (manifest.Find(name) != nullptr) {
      detector_pos[name] = c;
    } else if (IsLabelColumn(name)) {
      label_pos.emplace_back(name, c);
    } else {
      throw Error(ErrorCode::kUnknownColumn,
                  "column '" + name +
                      "' is neither a manifest detector nor an is_* label");
    }
  }
  std::set<std::string> present;
  for (const auto& [name, pos] : detector_pos) present.insert(name);
  CheckManifestCoverage(present, manifest);

  const std::vector<std::string> detectors = manifest.Ids();
  std::vector<size_t> order;
  for (const auto& d : detectors) order.push_back(detector_pos.at(d));

  std::vector<std::string> ids;
  std::vector<double> values;
  std::vector<LabelVector> labels;
  for (const auto& [name, pos] : label_pos) labels.push_back({name, {}});
  std::vector<CellRef> bad_cells;
  std::unordered_set<std::string> seen_ids;

  size_t data_row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (TrimView(line).empty()) continue;
    ++data_row;
    std::vector<std::string> fields = SplitDelimited(line, delim, line_no);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    std::string id(TrimView(fields[0]));
    if (!seen_ids.insert(id).second) {
      throw Error(ErrorCode::kDuplicateSampleId,
                  "duplicate sample id '" + id + "'");
    }
    ids.push_back(std::move(id));
    for (size_t k = 0; k < order.size(); ++k) {
      double v = 0.0;
      switch (ParseScoreCell(fields[order[k]], &v)) {
        case CellStatus::kOk:
          break;
        case CellStatus::kNonFinite:
          bad_cells.push_back({data_row, detectors[k]});
          break;
        case CellStatus::kMalformed:
          throw Error(ErrorCode::kParseError,
                      "row " + std::to_string(data_row) + ", column " +
                          detectors[k] + ": cannot parse '" +
                          fields[order[k]] + "' as a number");
      }
      values.push_back(v);
    }
    for (size_t l = 0; l < label_pos.size(); ++l) {
      labels[l].labels.push_back(ParseLabelCell(fields[label_pos[l].second],
                                                data_row, label_pos[l].first));
    }
  }
  if (!bad_cells.empty()) throw NonFiniteValueError(std::move(bad_cells));
  if (ids.empty()) {
    throw Error(ErrorCode::kParseError, "score file has no data rows");
  }
  return LoadedScores{ScoreTable(std::move(ids), detectors, std::move(values)),
                      std::move(labels)};
}

LoadedScores ParseJsonLines(std::istream& in,
                            const DetectorManifest& manifest) {
  const std::vector<std::string> detectors = manifest.Ids();
  std::vector<std::string> ids;
  std::vector<double> values;
  std::vector<LabelVector> labels;
  std::vector<CellRef> bad_cells;
  std::unordered_set<std::string> seen_ids;
  bool first = true;

  std::string line;
  size_t line_no = 0;
  size_t data_row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (TrimView(line).empty()) continue;
    ++data_row;
    auto where = [&]() { return "line " + std::to_string(line_no) + ": "; };
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParseError, where() + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("scores") ||
        !obj["scores"].is_object()) {
      throw Error(ErrorCode::kParseError,
                  where() + "expected an object with 'id' and 'scores'");
    }
    const json& jid = obj["id"];
    std::string id = jid.is_string() ? jid.get<std::string>() : jid.dump();
    if (!seen_ids.insert(id).second) {
      throw Error(ErrorCode::kDuplicateSampleId,
                  "duplicate sample id '" + id + "'");
    }
    ids.push_back(std::move(id));

    const json& scores = obj["scores"];
    std::set<std::string> present;
    for (const auto& [key, _] : scores.items()) {
      if (manifest.Find(key) == nullptr) {
        throw Error(ErrorCode::kUnknownColumn,
                    where() + "score '" + key + "' is not in the manifest");
      }
      present.insert(key);
    }
    CheckManifestCoverage(present, manifest);
    for (const auto& d : detectors) {
      const json& cell = scores[d];
      double v = 0.0;
      if (cell.is_number()) {
        v = cell.get<double>();
        if (!std::isfinite(v)) bad_cells.push_back({data_row, d});
      } else if (cell.is_null()) {
        bad_cells.push_back({data_row, d});
      } else if (cell.is_string()) {
        switch (ParseScoreCell(cell.get<std::string>(), &v)) {
          case CellStatus::kOk:
            break;
          case CellStatus::kNonFinite:
            bad_cells.push_back({data_row, d});
            break;
          case CellStatus::kMalformed:
            throw Error(ErrorCode::kParseError,
                        where() + "score '" + d + "' is not a number");
        }
      } else {
        throw Error(ErrorCode::kParseError,
                    where() + "score '" + d + "' is not a number");
      }
      values.push_back(v);
    }

    std::vector<std::pair<std::string, uint8_t>> row_labels;
    if (obj.contains("labels")) {
      if (!obj["labels"].is_object()) {
        throw Error(ErrorCode::kParseError, where() + "'labels' must be an object");
      }
      for (const auto& [key, val] : obj["labels"].items()) {
        uint8_t bit;
        if (val.is_boolean()) {
          bit = val.get<bool>() ? 1 : 0;
        } else if (val.is_number_integer() &&
                   (val.get<int64_t>() == 0 || val.get<int64_t>() == 1)) {
          bit = static_cast<uint8_t>(val.get<int64_t>());
        } else {
          throw Error(ErrorCode::kParseError,
                      where() + "label '" + key + "' must be 0 or 1");
        }
        row_labels.emplace_back(key, bit);
      }
    }
    if (first) {
      for (const auto& [key, _] : row_labels) labels.push_back({key, {}});
      first = false;
    }
    if (row_labels.size() != labels.size()) {
      throw Error(ErrorCode::kParseError,
                  where() + "label categories differ from the first row");
    }
    for (auto& lv : labels) {
      auto it = std::find_if(row_labels.begin(), row_labels.end(),
                             [&](const auto& p) { return p.first == lv.category; });
      if (it == row_labels.end()) {
        throw Error(ErrorCode::kParseError,
                    where() + "missing label '" + lv.category + "'");
      }
      lv.labels.push_back(it->second);
    }
  }
  if (!bad_cells.empty()) throw NonFiniteValueError(std::move(bad_cells));
  if (ids.empty()) {
    throw Error(ErrorCode::kParseError, "score file has no data rows");
  }
  return LoadedScores{ScoreTable(std::move(ids), detectors, std::move(values)),
                      std::move(labels)};
}

std::string DescribeCells(const std::vector<CellRef>& cells) {
  std::string msg = "non-finite or blank score cell(s):";
  for (const auto& c : cells) {
    msg += " (row " + std::to_string(c.row) + ", " + c.column + ")";
  }
  return msg;
}

}  // namespace

NonFiniteValueError::NonFiniteValueError(std::vector<CellRef> cells)
    : Error(ErrorCode::kNonFiniteValue, DescribeCells(cells)),
      cells_(std::move(cells)) {}

std::string_view TableFormatName(TableFormat format) {
  switch (format) {
    case TableFormat::kCsv: return "csv";
    case TableFormat::kTsv: return "tsv";
    case TableFormat::kJsonLines: return "jsonl";
  }
  return "csv";
}

TableFormat ParseTableFormat(std::string_view text) {
  if (text == "csv") return TableFormat::kCsv;
  if (text == "tsv") return TableFormat::kTsv;
  if (text == "jsonl" || text == "json-lines" || text == "ndjson") {
    return TableFormat::kJsonLines;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown table format '" + std::string(text) + "'");
}

TableFormat FormatFromExtension(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".tsv" || ext == ".tab") return TableFormat::kTsv;
  if (ext == ".jsonl" || ext == ".ndjson") return TableFormat::kJsonLines;
  return TableFormat::kCsv;
}

LoadedScores ParseScoreTable(std::istream& in, const DetectorManifest& manifest,
                             TableFormat format) {
  switch (format) {
    case TableFormat::kCsv: return ParseDelimited(in, manifest, ',');
    case TableFormat::kTsv: return ParseDelimited(in, manifest, '\t');
    case TableFormat::kJsonLines: return ParseJsonLines(in, manifest);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown table format");
}

LoadedScores LoadScoreTable(const std::filesystem::path& path,
                            const DetectorManifest& manifest,
                            TableFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open score file " + path.string());
  }
  return ParseScoreTable(in, manifest, format);
}

void WriteScoreTable(std::ostream& out, const ScoreTable& table,
                     std::span<const LabelVector> labels, TableFormat format) {
  for (const auto& lv : labels) {
    if (lv.labels.size() != table.num_samples()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "label vector '" + lv.category + "' is not row-aligned");
    }
  }
  if (format == TableFormat::kJsonLines) {
    for (size_t r = 0; r < table.num_samples(); ++r) {
      ordered_json obj;
      obj["id"] = table.sample_ids()[r];
      ordered_json scores = ordered_json::object();
      for (size_t c = 0; c < table.num_detectors(); ++c) {
        scores[table.detectors()[c]] = table.at(r, c);
      }
      obj["scores"] = std::move(scores);
      ordered_json lab = ordered_json::object();
      for (const auto& lv : labels) lab[lv.category] = int{lv.labels[r]};
      obj["labels"] = std::move(lab);
      out << obj.dump() << "\n";
    }
    return;
  }
  const char delim = format == TableFormat::kTsv ? '\t' : ',';
  out << "id";
  for (const auto& d : table.detectors()) out << delim << QuoteField(d, delim);
  for (const auto& lv : labels) out << delim << lv.category;
  out << "\n";
  for (size_t r = 0; r < table.num_samples(); ++r) {
    out << QuoteField(table.sample_ids()[r], delim);
    for (size_t c = 0; c < table.num_detectors(); ++c) {
      out << delim << FormatDouble(table.at(r, c));
    }
    for (const auto& lv : labels) out << delim << int{lv.labels[r]};
    out << "\n";
  }
}

void SaveScoreTable(const std::filesystem::path& path, const ScoreTable& table,
                    std::span<const LabelVector> labels, TableFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
  WriteScoreTable(out, table, labels, format);
}

}  // namespace stare
