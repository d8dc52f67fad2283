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

#ifndef STARE_ISOLATION_FOREST_H_
#define STARE_ISOLATION_FOREST_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "stare/score_data.h"

namespace stare {

struct ForestParams {
  int num_trees = 100;
  // Defaults to min(256, reference size) when unset.
  std::optional<size_t> subsample_size;
  uint64_t seed = 0;
};

size_t ResolveSubsampleSize(const ForestParams& params, size_t reference_size);

// H(n) = sum_{i=1..n} 1/i. Exact summation up to n = 10000, asymptotic
// expansion beyond.
double HarmonicNumber(size_t n);

// Average path length of an unsuccessful binary-search-tree lookup among n
// points: c(n) = 2 H(n-1) - 2 (n-1) / n, with c(0) = c(1) = 0.
double AveragePathLength(size_t n);

// Smallest L with 2^L >= n.
int DepthLimit(size_t n);

struct IsolationNode {
  int32_t feature = -1;  // Index into the model's detector list; -1 = leaf.
  double threshold = 0.0;
  int32_t left = -1;   // Rows with value < threshold.
  int32_t right = -1;  // Rows with value >= threshold.
  uint32_t size = 0;   // Training rows that reached this node.

  bool is_leaf() const { return feature < 0; }
};

struct IsolationTree {
  std::vector<IsolationNode> nodes;  // nodes[0] is the root.
};

class IsolationForestModel {
 public:
  IsolationForestModel(std::vector<std::string> detectors,
                       std::vector<IsolationTree> trees, size_t subsample_size,
                       uint64_t seed, bool degenerate);

  const std::vector<std::string>& detectors() const { return detectors_; }
  const std::vector<IsolationTree>& trees() const { return trees_; }
  size_t num_trees() const { return trees_.size(); }
  size_t subsample_size() const { return subsample_size_; }
  uint64_t seed() const { return seed_; }
  double normalizer() const { return normalizer_; }
  // True when every reference column was constant; all scores are then 0.5.
  bool degenerate() const { return degenerate_; }

  // Edges traversed plus c(leaf size) for the leaf reached.
  double PathLength(size_t tree, std::span<const double> row) const;

  // 2^(-mean path length / c(psi)); the row is aligned with detectors().
  double Score(std::span<const double> row) const;

  int MaxDepth() const;

  nlohmann::ordered_json ToJson() const;
  static IsolationForestModel FromJson(const nlohmann::ordered_json& j);

 private:
  std::vector<std::string> detectors_;
  std::vector<IsolationTree> trees_;
  size_t subsample_size_;
  uint64_t seed_;
  double normalizer_;
  bool degenerate_;
};

// Builds `num_trees` isolation trees over the raw canonical scores of the
// given detector subset. Each tree draws its subsample and splits from its
// own stream derived from (seed, tree index), so the result does not depend
// on `threads`.
IsolationForestModel FitIsolationForest(const ReferenceSet& reference,
                                        std::span<const std::string> subset,
                                        const ForestParams& params,
                                        int threads = 1);

double ScoreIsolationForest(const IsolationForestModel& model,
                            std::span<const double> raw_row);

}  // namespace stare

#endif  // STARE_ISOLATION_FOREST_H_
