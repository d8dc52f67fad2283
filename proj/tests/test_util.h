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

// Independent reference implementations used as test oracles, plus small
// generators. Nothing here calls the metric code it checks.

#ifndef STARE_TESTS_TEST_UTIL_H_
#define STARE_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "stare/random.h"
#include "stare/score_data.h"

namespace stare::testing {

// O(N^2) count over all positive/negative pairs with half credit for ties.
inline double PairwiseAuroc(std::span<const double> scores,
                            std::span<const uint8_t> labels) {
  int64_t twice_wins = 0;
  int64_t pos = 0;
  int64_t neg = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    (labels[i] ? pos : neg) += 1;
    if (!labels[i]) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      if (scores[i] > scores[j]) twice_wins += 2;
      else if (scores[i] == scores[j]) twice_wins += 1;
    }
  }
  return static_cast<double>(twice_wins) /
         (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

// Tries every threshold placement: gamma = -inf and gamma = each observed
// score (decision: flag if score > gamma), plus gamma = +inf.
inline double EnumeratedFprAtTpr(std::span<const double> scores,
                                 std::span<const uint8_t> labels,
                                 double target) {
  std::vector<double> gammas(scores.begin(), scores.end());
  gammas.push_back(-std::numeric_limits<double>::infinity());
  gammas.push_back(std::numeric_limits<double>::infinity());
  int64_t pos = 0;
  int64_t neg = 0;
  for (uint8_t l : labels) (l ? pos : neg) += 1;
  double best = 1.0;
  for (double g : gammas) {
    int64_t tp = 0;
    int64_t fp = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] > g) (labels[i] ? tp : fp) += 1;
    }
    if (static_cast<double>(tp) / static_cast<double>(pos) >= target) {
      best = std::min(best, static_cast<double>(fp) / static_cast<double>(neg));
    }
  }
  return best;
}

struct Instance {
  std::vector<double> scores;
  std::vector<uint8_t> labels;
};

// Random scores drawn from a small grid (forcing ties) or continuous, with
// both label classes present.
inline Instance RandomInstance(Rng& rng, size_t min_n = 2, size_t max_n = 200) {
  Instance inst;
  const size_t n = min_n + rng.UniformIndex(max_n - min_n + 1);
  const bool coarse = rng.UniformIndex(2) == 0;
  const uint64_t grid = 2 + rng.UniformIndex(10);
  inst.scores.resize(n);
  inst.labels.resize(n);
  for (size_t i = 0; i < n; ++i) {
    inst.labels[i] = static_cast<uint8_t>(rng.UniformIndex(2));
    const double shift = inst.labels[i] ? 0.3 : 0.0;
    inst.scores[i] = coarse ? static_cast<double>(rng.UniformIndex(grid))
                            : rng.Normal() + shift;
  }
  inst.labels[0] = 1;
  inst.labels[1] = 0;
  return inst;
}

inline ScoreTable MakeCanonicalTable(const std::vector<std::vector<double>>& rows,
                                     std::vector<std::string> detectors) {
  std::vector<std::string> ids;
  std::vector<double> values;
  for (size_t r = 0; r < rows.size(); ++r) {
    ids.push_back("s" + std::to_string(r));
    values.insert(values.end(), rows[r].begin(), rows[r].end());
  }
  return ScoreTable(std::move(ids), std::move(detectors), std::move(values),
                    ScoreState::kCanonical);
}

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void WriteText(const std::filesystem::path& path, const std::string& s) {
  std::ofstream out(path, std::ios::binary);
  out << s;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("stare_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace stare::testing

#endif  // STARE_TESTS_TEST_UTIL_H_
