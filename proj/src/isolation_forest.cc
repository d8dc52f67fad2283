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

#include "stare/isolation_forest.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "stare/log.h"
#include "stare/parallel.h"
#include "stare/random.h"
#include "stare/status.h"

namespace stare {
namespace {

constexpr size_t kExactHarmonicLimit = 10000;
constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

const std::vector<double>& HarmonicTable() {
  static const std::vector<double> table = [] {
    std::vector<double> h(kExactHarmonicLimit + 1, 0.0);
    for (size_t i = 1; i <= kExactHarmonicLimit; ++i) {
      h[i] = h[i - 1] + 1.0 / static_cast<double>(i);
    }
    return h;
  }();
  return table;
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<double>& data, size_t num_features,
              int depth_limit, Rng& rng)
      : data_(data),
        num_features_(num_features),
        depth_limit_(depth_limit),
        rng_(rng) {}

  IsolationTree Build(std::vector<size_t> rows) {
    rows_ = std::move(rows);
    tree_.nodes.clear();
    BuildNode(0, rows_.size(), 0);
    return std::move(tree_);
  }

 private:
  double Value(size_t row, size_t feature) const {
    return data_[row * num_features_ + feature];
  }

  int32_t BuildNode(size_t begin, size_t end, int depth) {
    const int32_t index = static_cast<int32_t>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[index].size = static_cast<uint32_t>(end - begin);
    if (end - begin <= 1 || depth >= depth_limit_) return index;

    // Features that are not constant within this node.
    candidates_.clear();
    bounds_.clear();
    for (size_t f = 0; f < num_features_; ++f) {
      double lo = Value(rows_[begin], f);
      double hi = lo;
      for (size_t i = begin + 1; i < end; ++i) {
        const double v = Value(rows_[i], f);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (lo < hi) {
        candidates_.push_back(f);
        bounds_.emplace_back(lo, hi);
      }
    }
    if (candidates_.empty()) return index;

    const size_t pick = static_cast<size_t>(rng_.UniformIndex(candidates_.size()));
    const size_t feature = candidates_[pick];
    const auto [lo, hi] = bounds_[pick];
    double threshold = lo + rng_.UniformOpen01() * (hi - lo);
    if (!(threshold > lo && threshold < hi)) threshold = lo + 0.5 * (hi - lo);
    // lo and hi are adjacent doubles; hi still separates them.
    if (!(threshold > lo)) threshold = hi;

    auto first = rows_.begin() + static_cast<std::ptrdiff_t>(begin);
    auto last = rows_.begin() + static_cast<std::ptrdiff_t>(end);
    auto mid = std::stable_partition(first, last, [&](size_t r) {
      return Value(r, feature) < threshold;
    });
    const size_t split = static_cast<size_t>(mid - rows_.begin());

    const int32_t left = BuildNode(begin, split, depth + 1);
    const int32_t right = BuildNode(split, end, depth + 1);
    IsolationNode& node = tree_.nodes[index];
    node.feature = static_cast<int32_t>(feature);
    node.threshold = threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  const std::vector<double>& data_;
  size_t num_features_;
  int depth_limit_;
  Rng& rng_;
  std::vector<size_t> rows_;
  IsolationTree tree_;
  std::vector<size_t> candidates_;
  std::vector<std::pair<double, double>> bounds_;
};

int SubtreeDepth(const IsolationTree& tree, int32_t node) {
  const IsolationNode& n = tree.nodes[node];
  if (n.is_leaf()) return 0;
  return 1 + std::max(SubtreeDepth(tree, n.left), SubtreeDepth(tree, n.right));
}

}  // namespace

size_t ResolveSubsampleSize(const ForestParams& params, size_t reference_size) {
  return params.subsample_size ? *params.subsample_size
                               : std::min<size_t>(256, reference_size);
}

double HarmonicNumber(size_t n) {
  if (n <= kExactHarmonicLimit) return HarmonicTable()[n];
  const double x = static_cast<double>(n);
  const double inv2 = 1.0 / (x * x);
  return std::log(x) + kEulerGamma + 0.5 / x - inv2 / 12.0 +
         inv2 * inv2 / 120.0;
}

double AveragePathLength(size_t n) {
  if (n <= 1) return 0.0;
  const double x = static_cast<double>(n);
  return 2.0 * HarmonicNumber(n - 1) - 2.0 * (x - 1.0) / x;
}

int DepthLimit(size_t n) {
  int depth = 0;
  while ((size_t{1} << depth) < n) ++depth;
  return depth;
}

IsolationForestModel::IsolationForestModel(std::vector<std::string> detectors,
                                           std::vector<IsolationTree> trees,
                                           size_t subsample_size, uint64_t seed,
                                           bool degenerate)
    : detectors_(std::move(detectors)),
      trees_(std::move(trees)),
      subsample_size_(subsample_size),
      seed_(seed),
      normalizer_(AveragePathLength(subsample_size)),
      degenerate_(degenerate) {
  if (detectors_.empty()) {
    throw Error(ErrorCode::kEmptySubset, "isolation forest needs detectors");
  }
  if (!degenerate_ && (trees_.empty() || subsample_size_ < 2)) {
    throw Error(ErrorCode::kInvalidForestParams,
                "non-degenerate forest needs trees and subsample size >= 2");
  }
  const int32_t k = static_cast<int32_t>(detectors_.size());
  for (const auto& tree : trees_) {
    const int32_t n = static_cast<int32_t>(tree.nodes.size());
    if (n == 0) {
      throw Error(ErrorCode::kInvalidForestParams, "empty isolation tree");
    }
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) continue;
      if (node.feature >= k || node.left <= 0 || node.left >= n ||
          node.right <= 0 || node.right >= n) {
        throw Error(ErrorCode::kInvalidForestParams,
                    "isolation tree node references out of range");
      }
    }
  }
}

double IsolationForestModel::PathLength(size_t tree,
                                        std::span<const double> row) const {
  const IsolationTree& t = trees_.at(tree);
  int32_t node = 0;
  int depth = 0;
  while (!t.nodes[node].is_leaf()) {
    const IsolationNode& n = t.nodes[node];
    node = row[static_cast<size_t>(n.feature)] < n.threshold ? n.left : n.right;
    ++depth;
  }
  return static_cast<double>(depth) + AveragePathLength(t.nodes[node].size);
}

double IsolationForestModel::Score(std::span<const double> row) const {
  if (row.size() != detectors_.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "row width does not match the forest's detector count");
  }
  if (degenerate_) return 0.5;
  double total = 0.0;
  for (size_t t = 0; t < trees_.size(); ++t) total += PathLength(t, row);
  const double mean = total / static_cast<double>(trees_.size());
  return std::exp2(-mean / normalizer_);
}

int IsolationForestModel::MaxDepth() const {
  int depth = 0;
  for (const auto& tree : trees_) depth = std::max(depth, SubtreeDepth(tree, 0));
  return depth;
}

nlohmann::ordered_json IsolationForestModel::ToJson() const {
  nlohmann::ordered_json j;
  j["detectors"] = detectors_;
  j["num_trees"] = trees_.size();
  j["subsample_size"] = subsample_size_;
  j["seed"] = seed_;
  j["normalizer"] = normalizer_;
  j["degenerate"] = degenerate_;
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const auto& tree : trees_) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& n : tree.nodes) {
      nlohmann::ordered_json rec;
      if (n.is_leaf()) {
        rec["leaf_size"] = n.size;
      } else {
        rec["feature"] = n.feature;
        rec["threshold"] = n.threshold;
        rec["left"] = n.left;
        rec["right"] = n.right;
        rec["size"] = n.size;
      }
      nodes.push_back(std::move(rec));
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);
  return j;
}

IsolationForestModel IsolationForestModel::FromJson(
    const nlohmann::ordered_json& j) {
  try {
    std::vector<IsolationTree> trees;
    for (const auto& jt : j.at("trees")) {
      IsolationTree tree;
      for (const auto& rec : jt.at("nodes")) {
        IsolationNode n;
        if (rec.contains("leaf_size")) {
          n.size = rec.at("leaf_size").get<uint32_t>();
        } else {
          n.feature = rec.at("feature").get<int32_t>();
          n.threshold = rec.at("threshold").get<double>();
          n.left = rec.at("left").get<int32_t>();
          n.right = rec.at("right").get<int32_t>();
          n.size = rec.at("size").get<uint32_t>();
        }
        tree.nodes.push_back(n);
      }
      trees.push_back(std::move(tree));
    }
    return IsolationForestModel(j.at("detectors").get<std::vector<std::string>>(),
                                std::move(trees),
                                j.at("subsample_size").get<size_t>(),
                                j.at("seed").get<uint64_t>(),
                                j.at("degenerate").get<bool>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError,
                std::string("malformed isolation forest document: ") + e.what());
  }
}

IsolationForestModel FitIsolationForest(const ReferenceSet& reference,
                                        std::span<const std::string> subset,
                                        const ForestParams& params,
                                        int threads) {
  if (subset.empty()) {
    throw Error(ErrorCode::kEmptySubset, "isolation forest needs detectors");
  }
  if (params.num_trees < 1) {
    throw Error(ErrorCode::kInvalidForestParams, "num_trees must be >= 1");
  }
  const ScoreTable& table = reference.table();
  const size_t m = table.num_samples();
  const size_t psi = ResolveSubsampleSize(params, m);
  if (psi > m) {
    throw Error(ErrorCode::kSubsampleTooLarge,
                "subsample size " + std::to_string(psi) +
                    " exceeds reference size " + std::to_string(m));
  }
  if (psi < 2) {
    throw Error(ErrorCode::kInvalidForestParams,
                "subsample size must be at least 2");
  }

  const size_t k = subset.size();
  std::vector<size_t> columns(k);
  for (size_t f = 0; f < k; ++f) columns[f] = table.RequireColumn(subset[f]);
  std::vector<double> data(m * k);
  bool all_constant = true;
  for (size_t f = 0; f < k; ++f) {
    const double first = table.at(0, columns[f]);
    for (size_t r = 0; r < m; ++r) {
      data[r * k + f] = table.at(r, columns[f]);
      if (data[r * k + f] != first) all_constant = false;
    }
  }
  std::vector<std::string> detectors(subset.begin(), subset.end());
  if (all_constant) {
    Warn("every isolation forest input column is constant on the reference "
         "set; the model scores every sample 0.5");
    return IsolationForestModel(std::move(detectors), {}, psi, params.seed,
                                /*degenerate=*/true);
  }

  const int depth_limit = DepthLimit(psi);
  std::vector<IsolationTree> trees(static_cast<size_t>(params.num_trees));
  ParallelFor(trees.size(), threads, [&](size_t t) {
    Rng rng(DeriveSeed(params.seed, t));
    std::vector<size_t> rows = SampleWithoutReplacement(m, psi, rng);
    TreeBuilder builder(data, k, depth_limit, rng);
    trees[t] = builder.Build(std::move(rows));
  });
  return IsolationForestModel(std::move(detectors), std::move(trees), psi,
                              params.seed, /*degenerate=*/false);
}

double ScoreIsolationForest(const IsolationForestModel& model,
                            std::span<const double> raw_row) {
  return model.Score(raw_row);
}

}  // namespace stare
