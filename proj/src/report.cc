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

#include "stare/report.h"

#include <charconv>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace stare {
namespace {

std::string JoinIds(const std::vector<std::string>& ids, const char* sep) {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) out += sep;
    out += ids[i];
  }
  return out;
}

std::string DisplayNames(const std::vector<std::string>& ids,
                         const DetectorManifest& manifest) {
  std::vector<std::string> names;
  for (const auto& id : ids) {
    const DetectorInfo* info = manifest.Find(id);
    names.push_back(info ? info->display_name : id);
  }
  return JoinIds(names, ", ");
}

std::string SignedPercent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.2f", 100.0 * v);
  return buf;
}

std::string Cell(const MetricSummary& m, bool with_std) {
  std::string s = FormatPercent(m.mean);
  if (with_std) s += " ± " + FormatPercent(m.std);
  return s;
}

std::string ProtocolLine(const ProtocolInfo& p) {
  std::ostringstream out;
  if (p.mode == "held-out") {
    out << "held-out reference (" << p.reference_size << " rows";
    if (!p.held_out.empty()) out << ", " << p.held_out;
    out << "); evaluated on the full table";
  } else {
    out << p.num_splits << " repeated splits, " << FormatPercent(p.ratio)
        << "% calibration (" << p.reference_size
        << " rows), seed " << p.seed << "; evaluated on the split remainder";
    if (p.resampled_splits) out << "; " << p.resampled_splits << " resampled";
  }
  return out.str();
}

}  // namespace

std::string FormatExact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string FormatPercent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

nlohmann::ordered_json ProtocolToJson(const ProtocolInfo& p) {
  nlohmann::ordered_json j;
  j["mode"] = p.mode;
  j["num_splits"] = p.num_splits;
  if (p.mode == "held-out") {
    j["held_out"] = p.held_out;
  } else {
    j["ratio"] = p.ratio;
    j["seed"] = p.seed;
    j["resampled_splits"] = p.resampled_splits;
  }
  j["reference_size"] = p.reference_size;
  j["evaluation_partition"] = p.evaluation_partition;
  return j;
}

void WriteEvalReportCsv(std::ostream& out, const EvalReport& report) {
  out << "category,method,group,detector_class,detectors,auroc_mean,"
         "auroc_std,fpr_mean,fpr_std,best_single,delta_auroc,delta_fpr\n";
  for (const auto& row : report.rows) {
    out << report.category << "," << row.method_name << ","
        << GroupName(row.group) << ","
        << (row.detector_class ? std::string(DetectorClassName(*row.detector_class))
                               : std::string())
        << "," << JoinIds(row.detectors, "+") << ","
        << FormatExact(row.auroc.mean) << "," << FormatExact(row.auroc.std)
        << "," << FormatExact(row.fpr.mean) << "," << FormatExact(row.fpr.std)
        << "," << row.best_single << "," << FormatExact(row.delta_auroc) << ","
        << FormatExact(row.delta_fpr) << "\n";
  }
}

nlohmann::ordered_json EvalReportToJson(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["category"] = report.category;
  j["protocol"] = ProtocolToJson(report.protocol);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["method"] = row.method_name;
    r["group"] = GroupName(row.group);
    if (row.detector_class) r["detector_class"] = DetectorClassName(*row.detector_class);
    r["detectors"] = row.detectors;
    r["auroc_mean"] = row.auroc.mean;
    r["auroc_std"] = row.auroc.std;
    r["fpr_mean"] = row.fpr.mean;
    r["fpr_std"] = row.fpr.std;
    r["best_single"] = row.best_single;
    r["delta_auroc_vs_best_single"] = row.delta_auroc;
    r["delta_fpr_vs_best_single"] = row.delta_fpr;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

std::string FormatEvalReportMarkdown(const EvalReport& report,
                                     const DetectorManifest& manifest) {
  const bool with_std = report.protocol.num_splits > 1;
  std::ostringstream out;
  out << "### " << report.category << "\n\n"
      << ProtocolLine(report.protocol) << "\n\n"
      << "| Detector | AUROC ↑ | FPR@90TPR ↓ |\n"
      << "|:---|---:|---:|\n"
      << "| **Individual Detectors** | | |\n";
  for (auto cls : {DetectorClass::kExternal, DetectorClass::kModelBased}) {
    bool header = false;
    for (const auto& row : report.rows) {
      if (row.group != MethodGroup::kSingle || row.detector_class != cls) continue;
      if (!header) {
        out << "| *" << (cls == DetectorClass::kExternal ? "External" : "Model-based")
            << "* | | |\n";
        header = true;
      }
      out << "| " << row.method_name << " | " << Cell(row.auroc, with_std)
          << " | " << Cell(row.fpr, with_std) << " |\n";
    }
  }
  out << "| **Aggregated Detectors** | | |\n";
  const std::pair<MethodGroup, const char*> groups[] = {
      {MethodGroup::kExternal, "External Only (gap to best single External)"},
      {MethodGroup::kModelBased,
       "Model-based Only (gap to best single Model-based)"},
      {MethodGroup::kAll, "All (gap to best overall)"},
  };
  for (const auto& [group, title] : groups) {
    bool header = false;
    for (const auto& row : report.rows) {
      if (row.group != group) continue;
      if (!header) {
        out << "| *" << title << "* | | |\n";
        header = true;
      }
      out << "| " << row.method_name << " | " << Cell(row.auroc, with_std)
          << " (" << SignedPercent(row.delta_auroc) << ") | "
          << Cell(row.fpr, with_std) << " (" << SignedPercent(row.delta_fpr)
          << ") |\n";
    }
  }
  const EvalRow* best = nullptr;
  for (const auto& row : report.rows) {
    if (row.group != MethodGroup::kSingle) continue;
    if (best == nullptr || row.auroc.mean > best->auroc.mean) best = &row;
  }
  if (best != nullptr) {
    out << "\nBest single detector: "
        << DisplayNames(best->detectors, manifest) << "\n";
  }
  return out.str();
}

void WriteSubsetSearchCsv(std::ostream& out, const SubsetSearchResult& result) {
  out << "category,size,best_subset,auroc_mean,auroc_std,fpr_mean,fpr_std,"
         "search_space\n";
  for (const auto& row : result.rows) {
    out << result.category << "," << row.size << ","
        << JoinIds(row.best_subset, "+") << "," << FormatExact(row.auroc.mean)
        << "," << FormatExact(row.auroc.std) << "," << FormatExact(row.fpr.mean)
        << "," << FormatExact(row.fpr.std) << "," << row.search_space << "\n";
  }
}

nlohmann::ordered_json SubsetSearchToJson(const SubsetSearchResult& result) {
  nlohmann::ordered_json j;
  j["category"] = result.category;
  j["protocol"] = ProtocolToJson(result.protocol);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : result.rows) {
    nlohmann::ordered_json r;
    r["size"] = row.size;
    r["best_subset"] = row.best_subset;
    r["auroc_mean"] = row.auroc.mean;
    r["auroc_std"] = row.auroc.std;
    r["fpr_mean"] = row.fpr.mean;
    r["fpr_std"] = row.fpr.std;
    r["search_space"] = row.search_space;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

std::string FormatSubsetSearchMarkdown(const SubsetSearchResult& result,
                                       const DetectorManifest& manifest) {
  const bool with_std = result.protocol.num_splits > 1;
  std::ostringstream out;
  out << "### " << result.category << " optimal detector subsets\n\n"
      << ProtocolLine(result.protocol) << "\n\n"
      << "| N | AUROC | FPR@90 | Subsets searched | Best subset |\n"
      << "|---:|---:|---:|---:|:---|\n";
  for (const auto& row : result.rows) {
    out << "| " << row.size << " | " << Cell(row.auroc, with_std) << " | "
        << Cell(row.fpr, with_std) << " | " << row.search_space << " | "
        << DisplayNames(row.best_subset, manifest) << " |\n";
  }
  return out.str();
}

void WriteSweepCsv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "size,method,metric,mean,std\n";
  for (const auto& row : rows) {
    out << row.size << "," << row.method << ",auroc,"
        << FormatExact(row.auroc.mean) << "," << FormatExact(row.auroc.std)
        << "\n";
    out << row.size << "," << row.method << ",fpr_at_90tpr,"
        << FormatExact(row.fpr.mean) << "," << FormatExact(row.fpr.std) << "\n";
  }
}

std::string FormatSweepMarkdown(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "| Reference size | Method | AUROC | FPR@90 |\n"
      << "|---:|:---|---:|---:|\n";
  for (const auto& row : rows) {
    out << "| " << row.size << " | " << row.method << " | "
        << Cell(row.auroc, true) << " | " << Cell(row.fpr, true) << " |\n";
  }
  return out.str();
}

}  // namespace stare
