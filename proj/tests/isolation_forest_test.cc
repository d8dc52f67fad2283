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
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "stare/random.h"
#include "stare/status.h"
#include "test_util.h"

namespace stare {
namespace {

using ::stare::testing::MakeCanonicalTable;

double DirectC(size_t n) {
  if (n < 2) return 0.0;
  long double h = 0.0L;
  for (size_t i = 1; i < n; ++i) h += 1.0L / static_cast<long double>(i);
  return static_cast<double>(2.0L * h - 2.0L * static_cast<long double>(n - 1) /
                                            static_cast<long double>(n));
}

TEST(AveragePathLengthTest, FrozenValues) {
  // High-precision values computed once offline.
  EXPECT_EQ(AveragePathLength(2), 1.0);
  EXPECT_NEAR(AveragePathLength(16), 4.761457986457986458, 1e-12);
  EXPECT_NEAR(AveragePathLength(64), 7.487781807411538052, 1e-12);
  EXPECT_NEAR(AveragePathLength(256), 10.248689925634560738, 1e-12);
  EXPECT_NEAR(AveragePathLength(1024), 13.018351344556267667, 1e-12);
  EXPECT_EQ(AveragePathLength(1), 0.0);
  EXPECT_EQ(AveragePathLength(0), 0.0);
}

TEST(AveragePathLengthTest, MatchesDirectSummation) {
  for (size_t n = 2; n <= 4096; n = n * 3 / 2 + 1) {
    EXPECT_NEAR(AveragePathLength(n), DirectC(n), 1e-12) << n;
  }
  EXPECT_NEAR(HarmonicNumber(255), (DirectC(256) + 2.0 * 255.0 / 256.0) / 2.0,
              1e-12);
}

TEST(AveragePathLengthTest, AsymptoticBranchIsContinuous) {
  EXPECT_NEAR(AveragePathLength(10001), DirectC(10001), 1e-9);
  EXPECT_NEAR(AveragePathLength(50000), DirectC(50000), 1e-9);
}

TEST(DepthLimitTest, CeilLog2) {
  EXPECT_EQ(DepthLimit(2), 1);
  EXPECT_EQ(DepthLimit(3), 2);
  EXPECT_EQ(DepthLimit(64), 6);
  EXPECT_EQ(DepthLimit(65), 7);
  EXPECT_EQ(DepthLimit(256), 8);
}

TEST(ResolveSubsampleSizeTest, Defaults) {
  EXPECT_EQ(ResolveSubsampleSize(ForestParams{}, 1000), 256u);
  EXPECT_EQ(ResolveSubsampleSize(ForestParams{}, 40), 40u);
  EXPECT_EQ(ResolveSubsampleSize(ForestParams{100, 32, 0}, 1000), 32u);
}

IsolationTree Leaf(uint32_t size) {
  IsolationTree t;
  IsolationNode n;
  n.size = size;
  t.nodes.push_back(n);
  return t;
}

TEST(IsolationScoreTest, ExpectedPathEqualToNormalizerGivesHalf) {
  // A root leaf holding all psi rows has path length exactly c(psi).
  const IsolationForestModel m({"a"}, {Leaf(64), Leaf(64)}, 64, 0, false);
  EXPECT_EQ(m.Score(std::vector<double>{3.0}), 0.5);
}

TEST(IsolationScoreTest, ShallowerPathsScoreHigher) {
  // Chain: each split isolates a single row on the right.
  double previous = 0.0;
  for (int depth = 12; depth >= 1; --depth) {
    IsolationTree t;
    for (int d = 0; d < depth; ++d) {
      IsolationNode split;
      split.feature = 0;
      split.threshold = static_cast<double>(d);
      split.left = static_cast<int32_t>(t.nodes.size() + 2);
      split.right = static_cast<int32_t>(t.nodes.size() + 1);
      split.size = 2;
      t.nodes.push_back(split);
      IsolationNode leaf;
      leaf.size = 1;
      t.nodes.push_back(leaf);
    }
    IsolationNode last;
    last.size = 1;
    t.nodes.push_back(last);
    const IsolationForestModel m({"a"}, {t}, 256, 0, false);
    // Value -1 goes left at every split, so it reaches the deepest leaf.
    const double s = m.Score(std::vector<double>{-1.0});
    EXPECT_GT(s, previous);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
    previous = s;
  }
}

ReferenceSet PlantedCluster(uint64_t seed, size_t* planted) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows(201);
  for (auto& r : rows) r = {rng.Normal(), rng.Normal()};
  *planted = rng.UniformIndex(rows.size());
  rows[*planted] = {10.0, -10.0};
  return ReferenceSet(MakeCanonicalTable(rows, {"x", "y"}),
                      ReferenceSource::kSampledSplit);
}

size_t TopIndex(const IsolationForestModel& m, const ScoreTable& t) {
  size_t best = 0;
  double best_score = -1.0;
  for (size_t i = 0; i < t.num_samples(); ++i) {
    const double s = m.Score(t.row(i));
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

TEST(IsolationForestTest, PlantedOutlierIsTopScored) {
  const std::vector<std::string> subset = {"x", "y"};
  int hits = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    size_t planted = 0;
    const ReferenceSet ref = PlantedCluster(1000 + seed, &planted);
    const auto m = FitIsolationForest(ref, subset, ForestParams{100, 64, seed});
    hits += TopIndex(m, ref.table()) == planted;
  }
  EXPECT_GE(hits, 19);
}

TEST(IsolationForestTest, MonotoneTransformKeepsTopOutlierRate) {
  const std::vector<std::string> subset = {"x", "y"};
  int hits = 0;
  int hits_transformed = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    size_t planted = 0;
    const ReferenceSet ref = PlantedCluster(2000 + seed, &planted);
    std::vector<double> v = ref.table().values();
    for (size_t i = 0; i < v.size(); i += 2) v[i] = std::exp(v[i] / 4.0);
    const ReferenceSet transformed(
        ScoreTable(ref.table().sample_ids(), ref.table().detectors(), v,
                   ScoreState::kCanonical),
        ReferenceSource::kSampledSplit);
    const ForestParams p{100, 64, seed};
    hits += TopIndex(FitIsolationForest(ref, subset, p), ref.table()) == planted;
    hits_transformed +=
        TopIndex(FitIsolationForest(transformed, subset, p),
                 transformed.table()) == planted;
  }
  EXPECT_GE(hits, 19);
  EXPECT_GE(hits_transformed, 19);
}

TEST(IsolationForestTest, ScoresInOpenUnitIntervalAndDepthBounded) {
  size_t planted = 0;
  const ReferenceSet ref = PlantedCluster(7, &planted);
  const std::vector<std::string> subset = {"x", "y"};
  const auto m = FitIsolationForest(ref, subset, ForestParams{50, 128, 3});
  EXPECT_LE(m.MaxDepth(), DepthLimit(128));
  EXPECT_EQ(m.num_trees(), 50u);
  for (size_t i = 0; i < ref.size(); ++i) {
    const double s = m.Score(ref.table().row(i));
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
}

TEST(IsolationForestTest, BitReproducibleAcrossThreadCounts) {
  size_t planted = 0;
  const ReferenceSet ref = PlantedCluster(8, &planted);
  const std::vector<std::string> subset = {"x", "y"};
  const ForestParams p{64, 100, 42};
  const auto a = FitIsolationForest(ref, subset, p, 1);
  const auto b = FitIsolationForest(ref, subset, p, 4);
  const auto c = FitIsolationForest(ref, subset, p, 1);
  EXPECT_EQ(a.ToJson().dump(), b.ToJson().dump());
  EXPECT_EQ(a.ToJson().dump(), c.ToJson().dump());
  for (size_t i = 0; i < ref.size(); ++i) {
    EXPECT_EQ(a.Score(ref.table().row(i)), b.Score(ref.table().row(i)));
  }
  const auto d = FitIsolationForest(ref, subset, ForestParams{64, 100, 43});
  EXPECT_NE(a.ToJson().dump(), d.ToJson().dump());
}

TEST(IsolationForestTest, JsonRoundTrip) {
  size_t planted = 0;
  const ReferenceSet ref = PlantedCluster(9, &planted);
  const std::vector<std::string> subset = {"y", "x"};
  const auto m = FitIsolationForest(ref, subset, ForestParams{10, 32, 5});
  const auto back = IsolationForestModel::FromJson(m.ToJson());
  EXPECT_EQ(back.detectors(), m.detectors());
  EXPECT_EQ(back.subsample_size(), m.subsample_size());
  EXPECT_EQ(back.ToJson().dump(), m.ToJson().dump());
  for (size_t i = 0; i < ref.size(); ++i) {
    const std::vector<double> row = {ref.table().at(i, 1), ref.table().at(i, 0)};
    EXPECT_EQ(back.Score(row), m.Score(row));
  }
}

TEST(IsolationForestTest, IdenticalRowsGiveDegenerateModel) {
  const ReferenceSet ref(
      MakeCanonicalTable(std::vector<std::vector<double>>(20, {1.0, 2.0}),
                         {"a", "b"}),
      ReferenceSource::kHeldOutFile);
  const std::vector<std::string> subset = {"a", "b"};
  const auto m = FitIsolationForest(ref, subset, ForestParams{});
  EXPECT_TRUE(m.degenerate());
  EXPECT_EQ(m.Score(std::vector<double>{1.0, 2.0}), 0.5);
  EXPECT_EQ(m.Score(std::vector<double>{100.0, -5.0}), 0.5);
}

ErrorCode FitError(const ReferenceSet& ref, std::vector<std::string> subset,
                   const ForestParams& params) {
  try {
    FitIsolationForest(ref, subset, params);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(IsolationForestTest, ErrorPaths) {
  const ReferenceSet ref(MakeCanonicalTable({{0.0}, {1.0}, {2.0}}, {"a"}),
                         ReferenceSource::kHeldOutFile);
  EXPECT_EQ(FitError(ref, {"a"}, ForestParams{10, 4, 0}),
            ErrorCode::kSubsampleTooLarge);
  EXPECT_EQ(FitError(ref, {"a"}, ForestParams{0, 2, 0}),
            ErrorCode::kInvalidForestParams);
  EXPECT_EQ(FitError(ref, {"a"}, ForestParams{10, 1, 0}),
            ErrorCode::kInvalidForestParams);
  EXPECT_EQ(FitError(ref, {}, ForestParams{}), ErrorCode::kEmptySubset);
  const auto m = FitIsolationForest(ref, std::vector<std::string>{"a"},
                                    ForestParams{5, 3, 0});
  EXPECT_THROW(m.Score(std::vector<double>{1.0, 2.0}), Error);
}

}  // namespace
}  // namespace stare
