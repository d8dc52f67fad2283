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

#include "stare/cli/run_config.h"

#include <cstdlib>
#include <fstream>
#include <set>
#include <utility>

#include "stare/status.h"

namespace stare::cli {
namespace {

using json = nlohmann::json;

[[noreturn]] void Fail(const std::string& what) {
  throw Error(ErrorCode::kConfigError, "config: " + what);
}

std::filesystem::path Resolve(const std::filesystem::path& base,
                              const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void RequireFile(const std::filesystem::path& path, const char* what) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::kIoError,
                std::string(what) + " file not found: " + path.string());
  }
}

const std::set<std::string> kTopLevelKeys = {
    "scores",  "scores_format", "manifest",   "held_out",   "protocol",
    "methods", "groups",        "categories", "calibration", "target_tpr",
    "threads", "output",        "subset_search", "sweep"};

MethodEntry ParseMethodEntry(const json& j) {
  MethodEntry entry;
  if (j.is_string()) {
    entry.method = ParseMethod(j.get<std::string>());
  } else if (j.is_object()) {
    entry.method = ParseMethod(j.at("method").get<std::string>());
    if (j.contains("name")) entry.name = j["name"].get<std::string>();
    if (j.contains("detectors")) {
      entry.detectors = j["detectors"].get<std::vector<std::string>>();
    }
    if (j.contains("group")) entry.group = ParseGroup(j["group"].get<std::string>());
    if (j.contains("num_trees")) entry.forest.num_trees = j["num_trees"].get<int>();
    if (j.contains("subsample_size")) {
      entry.forest.subsample_size = j["subsample_size"].get<size_t>();
    }
    if (j.contains("seed")) entry.forest.seed = j["seed"].get<uint64_t>();
  } else {
    Fail("each method must be a name or an object");
  }
  return entry;
}

}  // namespace

void RunConfig::Validate() const {
  RequireFile(scores, "scores");
  RequireFile(manifest, "manifest");
  if (mode == ProtocolMode::kHeldOut) {
    if (!held_out) Fail("protocol 'held-out' requires a 'held_out' file");
  } else {
    if (!(ratio > 0.0 && ratio < 1.0)) Fail("ratio must lie in (0, 1)");
    if (repeats < 1) Fail("repeats must be >= 1");
  }
  if (held_out) RequireFile(*held_out, "held-out");
  if (methods.empty()) Fail("at least one method is required");
  for (const auto& m : methods) {
    if (m.forest.num_trees < 1) Fail("num_trees must be >= 1");
    if (m.forest.subsample_size && *m.forest.subsample_size < 2) {
      Fail("subsample_size must be >= 2");
    }
  }
  if (!(target_tpr > 0.0 && target_tpr <= 1.0)) Fail("target_tpr must lie in (0, 1]");
  if (threads < 0) Fail("threads must be >= 0");
  for (const auto& f : formats) {
    if (f != "csv" && f != "json" && f != "md") {
      Fail("unknown output format '" + f + "'");
    }
  }
  if (sweep_repeats < 1) Fail("sweep repeats must be >= 1");
}

RunConfig ParseRunConfig(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) Fail("top level must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!kTopLevelKeys.count(key)) Fail("unknown key '" + key + "'");
  }
  RunConfig c;
  try {
    if (!j.contains("scores")) Fail("'scores' is required");
    if (!j.contains("manifest")) Fail("'manifest' is required");
    c.scores = Resolve(base_dir, j["scores"].get<std::string>());
    c.manifest = Resolve(base_dir, j["manifest"].get<std::string>());
    if (j.contains("scores_format")) {
      c.scores_format = ParseTableFormat(j["scores_format"].get<std::string>());
    }
    if (j.contains("held_out")) {
      c.held_out = Resolve(base_dir, j["held_out"].get<std::string>());
    }

    if (!j.contains("protocol")) Fail("'protocol' is required");
    const json& p = j["protocol"];
    const std::string mode = p.at("mode").get<std::string>();
    if (mode == "held-out") {
      c.mode = ProtocolMode::kHeldOut;
    } else if (mode == "repeated-splits") {
      c.mode = ProtocolMode::kRepeatedSplits;
      c.ratio = p.value("ratio", 0.1);
      c.repeats = p.value("repeats", 10);
    } else {
      Fail("protocol mode must be 'held-out' or 'repeated-splits'");
    }
    c.seed = p.value("seed", uint64_t{0});

    if (j.contains("methods")) {
      for (const auto& m : j["methods"]) c.methods.push_back(ParseMethodEntry(m));
    } else {
      for (auto m : {AggregationMethod::kIsolationForest,
                     AggregationMethod::kMaxNorm,
                     AggregationMethod::kStareSum}) {
        MethodEntry e;
        e.method = m;
        c.methods.push_back(e);
      }
    }
    if (j.contains("groups")) {
      c.groups.clear();
      for (const auto& g : j["groups"]) {
        const MethodGroup group = ParseGroup(g.get<std::string>());
        if (group == MethodGroup::kSingle) Fail("'single' is not an aggregate group");
        c.groups.push_back(group);
      }
    }
    if (j.contains("categories")) {
      c.categories = j["categories"].get<std::vector<std::string>>();
    }
    if (j.contains("calibration")) {
      const json& cal = j["calibration"];
      c.calibration.clamp = cal.value("clamp", false);
      if (cal.contains("quantiles") && !cal["quantiles"].is_null()) {
        const auto q = cal["quantiles"].get<std::vector<double>>();
        if (q.size() != 2) Fail("calibration.quantiles must be [lower, upper]");
        c.calibration.quantiles = std::make_pair(q[0], q[1]);
      }
    }
    c.target_tpr = j.value("target_tpr", 0.9);
    c.threads = j.value("threads", 0);

    if (j.contains("output")) {
      const json& o = j["output"];
      if (o.contains("dir")) c.output_dir = Resolve(base_dir, o["dir"].get<std::string>());
      if (o.contains("formats")) c.formats = o["formats"].get<std::vector<std::string>>();
    }
    if (c.output_dir.empty()) {
      const char* env = std::getenv(kOutputDirEnv);
      c.output_dir = env && *env ? std::filesystem::path(env)
                                 : std::filesystem::path("stare_out");
    }
    if (j.contains("subset_search")) {
      c.subset_max_n = j["subset_search"].value("max_n", size_t{0});
    }
    if (j.contains("sweep")) {
      const json& s = j["sweep"];
      if (s.contains("sizes")) c.sweep_sizes = s["sizes"].get<std::vector<size_t>>();
      c.sweep_repeats = s.value("repeats", 1);
      c.sweep_seed = s.value("seed", uint64_t{0});
    }
  } catch (const json::exception& e) {
    Fail(e.what());
  }
  return c;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "config file not found: " + path.string());
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    Fail(std::string("cannot parse ") + path.string() + ": " + e.what());
  }
  return ParseRunConfig(j, path.parent_path());
}

std::vector<MethodSpec> ExpandMethods(const RunConfig& config,
                                      const DetectorManifest& manifest,
                                      const std::vector<std::string>& detectors) {
  std::vector<MethodSpec> specs;
  for (MethodGroup group : config.groups) {
    for (const auto& entry : config.methods) {
      if (!entry.detectors.empty()) continue;
      const AggregationMethod m = entry.method;
      for (MethodSpec& spec : BuildMethodGrid(manifest, detectors, {&m, 1},
                                              entry.forest)) {
        if (spec.group != group) continue;
        if (entry.name) spec.name = *entry.name;
        specs.push_back(std::move(spec));
      }
    }
  }
  for (const auto& entry : config.methods) {
    if (entry.detectors.empty()) continue;
    MethodSpec spec;
    spec.name = entry.name ? *entry.name : std::string(MethodDisplayName(entry.method));
    spec.group = entry.group;
    spec.config.method = entry.method;
    spec.config.detector_subset = entry.detectors;
    if (entry.method == AggregationMethod::kIsolationForest) {
      spec.config.forest_params = entry.forest;
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

}  // namespace stare::cli
