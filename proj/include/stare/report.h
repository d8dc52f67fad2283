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

#ifndef STARE_REPORT_H_
#define STARE_REPORT_H_

#include <iosfwd>
#include <span>
#include <string>

#include "nlohmann/json.hpp"
#include "stare/experiments.h"
#include "stare/score_data.h"

namespace stare {

// Full-precision values in [0, 1]; markdown shows percentages rounded to
// two decimals.
void WriteEvalReportCsv(std::ostream& out, const EvalReport& report);
nlohmann::ordered_json EvalReportToJson(const EvalReport& report);
std::string FormatEvalReportMarkdown(const EvalReport& report,
                                     const DetectorManifest& manifest);

void WriteSubsetSearchCsv(std::ostream& out, const SubsetSearchResult& result);
nlohmann::ordered_json SubsetSearchToJson(const SubsetSearchResult& result);
std::string FormatSubsetSearchMarkdown(const SubsetSearchResult& result,
                                       const DetectorManifest& manifest);

// Long format, one line per (size, method, metric).
void WriteSweepCsv(std::ostream& out, std::span<const SweepRow> rows);
std::string FormatSweepMarkdown(std::span<const SweepRow> rows);

nlohmann::ordered_json ProtocolToJson(const ProtocolInfo& protocol);

// Shortest representation that reads back to the same double.
std::string FormatExact(double v);
// 100 * v with two decimals.
std::string FormatPercent(double v);

}  // namespace stare

#endif  // STARE_REPORT_H_
