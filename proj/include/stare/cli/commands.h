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

#ifndef STARE_CLI_COMMANDS_H_
#define STARE_CLI_COMMANDS_H_

#include <iosfwd>
#include <string>

#include "stare/cli/run_config.h"

namespace stare::cli {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitInternalError = 2;

// Each command writes result files under config.output_dir, prints markdown
// to `out` and diagnostics to `err`, and returns an exit status.
int RunEvaluate(const RunConfig& config, std::ostream& out, std::ostream& err);
int RunSubsetSearch(const RunConfig& config, std::ostream& out,
                    std::ostream& err);
int RunSweep(const RunConfig& config, std::ostream& out, std::ostream& err);
// Checks AUROC >= 0.5 on `category` (default: is_hall, else the first
// category) for every canonicalized detector.
int RunValidateManifest(const RunConfig& config, const std::string& category,
                        std::ostream& out, std::ostream& err);

}  // namespace stare::cli

#endif  // STARE_CLI_COMMANDS_H_
