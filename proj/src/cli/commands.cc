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

#include "stare/cli/commands.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <utility>

#include "stare/experiments.h"
#include "stare/normalization.h"
#include "stare/report.h"
#include "stare/status.h"

namespace stare::cli {
namespace {

// Pipeline stage blamed in diagnostics.
enum class Stage { kConfig, kLoad, kEvaluate, kWrite };

const char* StageForError(Stage stage, ErrorCode code) {
  switch (stage) {
    case Stage::kConfig: return "config";
    case Stage::kLoad: return "load";
    case Stage::kWrite: return "write";
    case Stage::kEvaluate: break;
  }
  switch (code) {
    case ErrorCode::kDegenerateLabels:
      return "metric";
    case ErrorCode::kEmptySubset:
    case ErrorCode::kLengthMismatch:
    case ErrorCode::kSubsampleTooLarge:
    case ErrorCode::kInvalidForestParams:
    case ErrorCode::kForestNotFitted:
    case ErrorCode::kTooManyDetectors:
      return "aggregate";
    default:
      return "calibrate";
  }
}

struct LoadedRun {
  DetectorManifest manifest;
  ScoreTable table;  // canonical
  std::vector<LabelVector> labels;
  std::shared_ptr<const ReferenceSet> held_out;
};

LoadedRun Load(const RunConfig& config) {
  DetectorManifest manifest = LoadManifest(config.manifest);
  const TableFormat format =
      config.scores_format.value_or(FormatFromExtension(config.scores));
  LoadedScores loaded = LoadScoreTable(config.scores, manifest, format);
  ScoreTable canonical = CanonicalizeOrientation(loaded.table, manifest);
  std::shared_ptr<const ReferenceSet> held_out;
  if (config.held_out) {
    held_out = std::make_shared<ReferenceSet>(LoadReferenceSet(
        *config.held_out, manifest, FormatFromExtension(*config.held_out)));
  }

  std::vector<LabelVector> labels;
  if (config.categories.empty()) {
    labels = std::move(loaded.labels);
  } else {
    for (const auto& cat : config.categories) {
      auto it = std::find_if(loaded.labels.begin(), loaded.labels.end(),
                             [&](const LabelVector& l) { return l.category == cat; });
      if (it == loaded.labels.end()) {
        throw Error(ErrorCode::kMissingColumn,
                    "label category '" + cat + "' not found in " +
                        config.scores.string());
      }
      labels.push_back(*it);
    }
  }
  if (labels.empty()) {
    throw Error(ErrorCode::kMissingColumn,
                "score file has no is_* label columns: " + config.scores.string());
  }
  return LoadedRun{std::move(manifest), std::move(canonical), std::move(labels),
                   std::move(held_out)};
}

ReferenceProtocol MakeProtocol(const RunConfig& config, const LoadedRun& run) {
  if (config.mode == ProtocolMode::kHeldOut) {
    return HeldOutProtocol{run.held_out, config.held_out->filename().string()};
  }
  return RepeatedSplitsProtocol{config.ratio, config.repeats, config.seed};
}

ExperimentOptions MakeOptions(const RunConfig& config) {
  return ExperimentOptions{config.calibration, config.target_tpr, config.threads};
}

bool Wants(const RunConfig& config, const char* format) {
  return std::find(config.formats.begin(), config.formats.end(), format) !=
         config.formats.end();
}

void WriteFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content)) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
}

// Timestamps live here so that the result files stay byte-identical.
void WriteMetadata(const RunConfig& config, const std::string& command) {
  const auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  nlohmann::ordered_json meta;
  meta["command"] = command;
  meta["finished_at"] = ts.str();
  meta["scores"] = config.scores.string();
  meta["manifest"] = config.manifest.string();
  if (config.held_out) meta["held_out"] = config.held_out->string();
  meta["threads"] = config.threads;
  WriteFile(config.output_dir / "run_metadata.json", meta.dump(2) + "\n");
}

template <typename Body>
int Guard(std::ostream& err, Stage& stage, Body&& body) {
  try {
    body();
    return kExitOk;
  } catch (const Error& e) {
    err << "error [" << StageForError(stage, e.code()) << "] "
        << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return kExitUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
}

void PrepareOutputDir(const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError, "cannot create output directory " +
                                         config.output_dir.string() + ": " +
                                         ec.message());
  }
}

}  // namespace

int RunEvaluate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Stage stage = Stage::kConfig;
  return Guard(err, stage, [&] {
    config.Validate();
    stage = Stage::kLoad;
    const LoadedRun run = Load(config);
    stage = Stage::kEvaluate;
    const std::vector<MethodSpec> specs =
        ExpandMethods(config, run.manifest, run.table.detectors());
    const ReferenceProtocol protocol = MakeProtocol(config, run);
    const std::vector<EvalReport> reports = PerCategoryReport(
        run.table, run.labels, run.manifest, protocol, specs, MakeOptions(config));

    // Render everything before touching the filesystem so a failure never
    // leaves a partial report behind.
    std::vector<std::pair<std::string, std::string>> files;
    std::string markdown;
    for (const auto& report : reports) {
      const std::string base = "report_" + report.category;
      const std::string md = FormatEvalReportMarkdown(report, run.manifest);
      markdown += md + "\n";
      if (Wants(config, "csv")) {
        std::ostringstream csv;
        WriteEvalReportCsv(csv, report);
        files.emplace_back(base + ".csv", csv.str());
      }
      if (Wants(config, "json")) {
        files.emplace_back(base + ".json", EvalReportToJson(report).dump(2) + "\n");
      }
      if (Wants(config, "md")) files.emplace_back(base + ".md", md);
    }
    if (config.mode == ProtocolMode::kHeldOut) {
      files.emplace_back(
          "calibration_stats.json",
          FitCalibration(*run.held_out, config.calibration).ToJson().dump(2) + "\n");
    }

    stage = Stage::kWrite;
    PrepareOutputDir(config);
    for (const auto& [name, content] : files) {
      WriteFile(config.output_dir / name, content);
    }
    WriteMetadata(config, "evaluate");
    out << markdown;
  });
}

int RunSubsetSearch(const RunConfig& config, std::ostream& out,
                    std::ostream& err) {
  Stage stage = Stage::kConfig;
  return Guard(err, stage, [&] {
    config.Validate();
    stage = Stage::kLoad;
    const LoadedRun run = Load(config);
    stage = Stage::kEvaluate;
    const ReferenceProtocol protocol = MakeProtocol(config, run);
    std::vector<std::pair<std::string, std::string>> files;
    std::string markdown;
    for (const auto& labels : run.labels) {
      const SubsetSearchResult result =
          SubsetSearch(run.table, labels, run.manifest, protocol,
                       AggregationMethod::kStareSum, config.subset_max_n,
                       MakeOptions(config));
      const std::string base = "subsets_" + labels.category;
      const std::string md = FormatSubsetSearchMarkdown(result, run.manifest);
      markdown += md + "\n";
      if (Wants(config, "csv")) {
        std::ostringstream csv;
        WriteSubsetSearchCsv(csv, result);
        files.emplace_back(base + ".csv", csv.str());
      }
      if (Wants(config, "json")) {
        files.emplace_back(base + ".json", SubsetSearchToJson(result).dump(2) + "\n");
      }
      if (Wants(config, "md")) files.emplace_back(base + ".md", md);
    }
    stage = Stage::kWrite;
    PrepareOutputDir(config);
    for (const auto& [name, content] : files) {
      WriteFile(config.output_dir / name, content);
    }
    WriteMetadata(config, "subset-search");
    out << markdown;
  });
}

int RunSweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Stage stage = Stage::kConfig;
  return Guard(err, stage, [&] {
    config.Validate();
    if (!config.held_out) {
      throw Error(ErrorCode::kConfigError,
                  "config: sweep requires a 'held_out' reference file");
    }
    if (config.sweep_sizes.empty()) {
      throw Error(ErrorCode::kConfigError, "config: sweep requires sizes");
    }
    stage = Stage::kLoad;
    const LoadedRun run = Load(config);
    stage = Stage::kEvaluate;
    ForestParams forest;
    for (const auto& m : config.methods) {
      if (m.method == AggregationMethod::kIsolationForest) forest = m.forest;
    }
    std::vector<std::pair<std::string, std::string>> files;
    std::string markdown;
    for (const auto& labels : run.labels) {
      const std::vector<SweepRow> rows = ReferenceSizeSweep(
          run.table, labels, run.manifest, *run.held_out, config.sweep_sizes,
          config.sweep_repeats, config.sweep_seed, forest, MakeOptions(config));
      std::ostringstream csv;
      WriteSweepCsv(csv, rows);
      files.emplace_back("sweep_" + labels.category + ".csv", csv.str());
      const std::string md =
          "### " + labels.category + " reference size sweep\n\n" +
          FormatSweepMarkdown(rows);
      markdown += md + "\n";
      if (Wants(config, "md")) files.emplace_back("sweep_" + labels.category + ".md", md);
    }
    stage = Stage::kWrite;
    PrepareOutputDir(config);
    for (const auto& [name, content] : files) {
      WriteFile(config.output_dir / name, content);
    }
    WriteMetadata(config, "sweep");
    out << markdown;
  });
}

int RunValidateManifest(const RunConfig& config, const std::string& category,
                        std::ostream& out, std::ostream& err) {
  Stage stage = Stage::kLoad;
  bool all_ok = true;
  const int status = Guard(err, stage, [&] {
    const DetectorManifest manifest = LoadManifest(config.manifest);
    const TableFormat format =
        config.scores_format.value_or(FormatFromExtension(config.scores));
    LoadedScores loaded = LoadScoreTable(config.scores, manifest, format);
    if (loaded.labels.empty()) {
      throw Error(ErrorCode::kMissingColumn, "score file has no is_* label columns");
    }
    const std::string wanted = !category.empty() ? category : "is_hall";
    const LabelVector* labels = &loaded.labels.front();
    bool found = false;
    for (const auto& l : loaded.labels) {
      if (l.category == wanted) {
        labels = &l;
        found = true;
      }
    }
    if (!found && !category.empty()) {
      throw Error(ErrorCode::kMissingColumn,
                  "label category '" + category + "' not found");
    }
    stage = Stage::kEvaluate;
    const ScoreTable canonical = CanonicalizeOrientation(loaded.table, manifest);
    out << "| Detector | Orientation | AUROC (" << labels->category
        << ") | Status |\n|:---|:---|---:|:---|\n";
    for (const auto& check : ValidateOrientation(canonical, *labels)) {
      const DetectorInfo& info = manifest.Get(check.detector);
      out << "| " << info.display_name << " | " << OrientationName(info.orientation)
          << " | " << FormatPercent(check.auroc) << " | "
          << (check.ok ? "ok" : "flip orientation") << " |\n";
      if (!check.ok) {
        all_ok = false;
        err << "detector '" << check.detector
            << "' has AUROC below 0.5 after canonicalization; its orientation "
               "should be flipped\n";
      }
    }
  });
  if (status != kExitOk) return status;
  return all_ok ? kExitOk : kExitUserError;
}

}  // namespace stare::cli
