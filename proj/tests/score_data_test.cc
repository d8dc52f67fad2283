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

#include "stare/score_data.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "stare/metrics.h"
#include "stare/random.h"
#include "stare/status.h"
#include "test_util.h"

namespace stare {
namespace {

constexpr char kManifest[] = R"(# two detectors
[labse]
display_name = LaBSE
orientation = quality-high
class = external

[seqlogprob]
display_name = Seq-Logprob
orientation = quality-high
class = model-based
)";

DetectorManifest Manifest() { return ParseManifest(kManifest); }

LoadedScores ParseCsv(const std::string& text) {
  std::istringstream in(text);
  return ParseScoreTable(in, Manifest(), TableFormat::kCsv);
}

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(ManifestTest, ParsesEntries) {
  const DetectorManifest m = Manifest();
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.Get("labse").display_name, "LaBSE");
  EXPECT_EQ(m.Get("seqlogprob").detector_class, DetectorClass::kModelBased);
  EXPECT_EQ(m.IdsOfClass(DetectorClass::kExternal),
            std::vector<std::string>{"labse"});
  EXPECT_EQ(CodeOf([&] { m.Get("alti"); }), ErrorCode::kMissingColumn);
}

TEST(ManifestTest, FormatRoundTrip) {
  const DetectorManifest m = Manifest();
  const DetectorManifest back = ParseManifest(FormatManifest(m));
  ASSERT_EQ(back.size(), m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    EXPECT_EQ(back.entries()[i].id, m.entries()[i].id);
    EXPECT_EQ(back.entries()[i].display_name, m.entries()[i].display_name);
    EXPECT_EQ(back.entries()[i].orientation, m.entries()[i].orientation);
    EXPECT_EQ(back.entries()[i].detector_class, m.entries()[i].detector_class);
  }
}

TEST(ManifestTest, Errors) {
  EXPECT_EQ(CodeOf([] {
              ParseManifest("[a]\norientation = anomaly-high\nclass = external\n"
                            "[a]\norientation = anomaly-high\nclass = external\n");
            }),
            ErrorCode::kManifestError);
  EXPECT_EQ(CodeOf([] { ParseManifest("[a]\norientation = up\n"); }),
            ErrorCode::kManifestError);
  EXPECT_EQ(CodeOf([] { ParseManifest("[a]\nclass = external\n"); }),
            ErrorCode::kManifestError);
  EXPECT_EQ(CodeOf([] { ParseManifest("# nothing\n"); }),
            ErrorCode::kManifestError);
}

TEST(LoadScoreTableTest, ThreeRowCsv) {
  const LoadedScores s = ParseCsv(
      "id,labse,seqlogprob,is_hall\n"
      "a,0.9,-1.5,0\n"
      "b,0.2,-7.25e0,1\n"
      "c,0.85,-2,0\n");
  EXPECT_EQ(s.table.num_samples(), 3u);
  EXPECT_EQ(s.table.num_detectors(), 2u);
  EXPECT_FALSE(s.table.canonical());
  ASSERT_EQ(s.labels.size(), 1u);
  EXPECT_EQ(s.labels[0].category, "is_hall");
  EXPECT_EQ(s.labels[0].labels, (std::vector<uint8_t>{0, 1, 0}));
  EXPECT_EQ(s.table.at(1, 1), -7.25);
}

TEST(LoadScoreTableTest, ReordersColumnsToManifestOrder) {
  const LoadedScores s = ParseCsv(
      "id,is_osc,seqlogprob,labse,is_hall\n"
      "a,1,-1,0.5,0\n");
  EXPECT_EQ(s.table.detectors(),
            (std::vector<std::string>{"labse", "seqlogprob"}));
  EXPECT_EQ(s.table.at(0, 0), 0.5);
  EXPECT_EQ(s.labels[0].category, "is_osc");
  EXPECT_EQ(s.labels[1].category, "is_hall");
}

TEST(LoadScoreTableTest, MissingColumn) {
  try {
    ParseCsv("id,labse,is_hall\na,0.9,0\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingColumn);
    EXPECT_NE(std::string(e.what()).find("seqlogprob"), std::string::npos);
  }
}

TEST(LoadScoreTableTest, NonFiniteReportsEveryCell) {
  try {
    ParseCsv(
        "id,labse,seqlogprob,is_hall\n"
        "a,0.9,-1,0\n"
        "b,NaN,-2,1\n"
        "c,0.4,,0\n"
        "d,inf,-3,0\n");
    FAIL();
  } catch (const NonFiniteValueError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteValue);
    ASSERT_EQ(e.cells().size(), 3u);
    EXPECT_EQ(e.cells()[0].row, 2u);
    EXPECT_EQ(e.cells()[0].column, "labse");
    EXPECT_EQ(e.cells()[1].row, 3u);
    EXPECT_EQ(e.cells()[1].column, "seqlogprob");
    EXPECT_EQ(e.cells()[2].row, 4u);
  }
}

TEST(LoadScoreTableTest, OtherErrors) {
  EXPECT_EQ(CodeOf([] {
              ParseCsv("id,labse,seqlogprob\na,1,2\na,3,4\n");
            }),
            ErrorCode::kDuplicateSampleId);
  EXPECT_EQ(CodeOf([] {
              ParseCsv("id,labse,seqlogprob,comet\na,1,2,3\n");
            }),
            ErrorCode::kUnknownColumn);
  EXPECT_EQ(CodeOf([] {
              ParseCsv("id,labse,seqlogprob,is_hall\na,1,2,2\n");
            }),
            ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([] {
              ParseCsv("id,labse,seqlogprob\na,1,2x\n");
            }),
            ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([] {
              ParseCsv("id,labse,seqlogprob\na,1\n");
            }),
            ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([] {
              LoadScoreTable("/nonexistent/scores.csv", Manifest(),
                             TableFormat::kCsv);
            }),
            ErrorCode::kIoError);
}

TEST(LoadScoreTableTest, QuotedCsvAndTsv) {
  const LoadedScores s = ParseCsv(
      "id,labse,seqlogprob\n\"x,1\",0.5,\"-1\"\n");
  EXPECT_EQ(s.table.sample_ids()[0], "x,1");
  std::istringstream tsv("id\tlabse\tseqlogprob\tis_hall\nq\t1e-3\t2\t1\n");
  const LoadedScores t = ParseScoreTable(tsv, Manifest(), TableFormat::kTsv);
  EXPECT_EQ(t.table.at(0, 0), 1e-3);
}

TEST(LoadScoreTableTest, JsonLines) {
  std::istringstream in(
      R"({"id":"a","scores":{"seqlogprob":-1.5,"labse":0.9},"labels":{"is_hall":1}})"
      "\n"
      R"({"id":"b","scores":{"labse":0.1,"seqlogprob":-0.5},"labels":{"is_hall":0}})"
      "\n");
  const LoadedScores s = ParseScoreTable(in, Manifest(), TableFormat::kJsonLines);
  EXPECT_EQ(s.table.at(0, 0), 0.9);
  EXPECT_EQ(s.table.at(1, 1), -0.5);
  EXPECT_EQ(s.labels[0].labels, (std::vector<uint8_t>{1, 0}));
}

TEST(TableFormatTest, FromExtension) {
  EXPECT_EQ(FormatFromExtension("x/scores.csv"), TableFormat::kCsv);
  EXPECT_EQ(FormatFromExtension("scores.tsv"), TableFormat::kTsv);
  EXPECT_EQ(FormatFromExtension("scores.jsonl"), TableFormat::kJsonLines);
  EXPECT_EQ(ParseTableFormat("json-lines"), TableFormat::kJsonLines);
}

TEST(RoundTripProperty, AllFormatsBitIdentical) {
  Rng rng(301);
  const DetectorManifest m = Manifest();
  for (TableFormat f :
       {TableFormat::kCsv, TableFormat::kTsv, TableFormat::kJsonLines}) {
    for (int trial = 0; trial < 50; ++trial) {
      const size_t n = 1 + rng.UniformIndex(30);
      std::vector<std::string> ids;
      std::vector<double> values;
      LabelVector hall{"is_hall", {}};
      for (size_t i = 0; i < n; ++i) {
        ids.push_back("id" + std::to_string(i * 7919 % 1000003));
        values.push_back(rng.Normal() * std::pow(10.0, rng.Normal() * 20.0));
        values.push_back(std::nextafter(rng.Uniform01(), 2.0));
        hall.labels.push_back(static_cast<uint8_t>(rng.UniformIndex(2)));
      }
      const ScoreTable t(ids, {"labse", "seqlogprob"}, values);
      std::ostringstream out;
      const std::vector<LabelVector> labels = {hall};
      WriteScoreTable(out, t, labels, f);
      std::istringstream in(out.str());
      const LoadedScores back = ParseScoreTable(in, m, f);
      EXPECT_EQ(back.table.sample_ids(), t.sample_ids());
      EXPECT_EQ(back.table.detectors(), t.detectors());
      EXPECT_EQ(back.table.values(), t.values());
      ASSERT_EQ(back.labels.size(), 1u);
      EXPECT_EQ(back.labels[0].labels, hall.labels);
    }
  }
}

TEST(ScoreTableTest, ConstructorValidation) {
  EXPECT_EQ(CodeOf([] { ScoreTable({"a", "a"}, {"d"}, {1.0, 2.0}); }),
            ErrorCode::kDuplicateSampleId);
  EXPECT_EQ(CodeOf([] {
              ScoreTable({"a"}, {"d"},
                         {std::numeric_limits<double>::quiet_NaN()});
            }),
            ErrorCode::kNonFiniteValue);
  EXPECT_EQ(CodeOf([] { ScoreTable({"a"}, {"d"}, {1.0, 2.0}); }),
            ErrorCode::kLengthMismatch);
  EXPECT_THROW(ScoreTable({}, {"d"}, {}), Error);
}

TEST(CanonicalizeTest, NegatesQualityHighOnly) {
  const DetectorManifest m = ParseManifest(
      "[labse]\norientation = quality-high\nclass = external\n"
      "[alti]\norientation = quality-high\nclass = model-based\n"
      "[attn]\norientation = anomaly-high\nclass = model-based\n");
  const ScoreTable raw({"x", "y"}, {"labse", "alti", "attn"},
                       {0.95, 0.1, 3.0, 0.5, 0.7, -2.0});
  const ScoreTable c = CanonicalizeOrientation(raw, m);
  EXPECT_TRUE(c.canonical());
  EXPECT_EQ(c.values(), (std::vector<double>{-0.95, -0.1, 3.0, -0.5, -0.7, -2.0}));
  EXPECT_EQ(CodeOf([&] { CanonicalizeOrientation(c, m); }),
            ErrorCode::kAlreadyCanonical);
  const DetectorManifest partial = ParseManifest(
      "[labse]\norientation = quality-high\nclass = external\n");
  EXPECT_EQ(CodeOf([&] { CanonicalizeOrientation(raw, partial); }),
            ErrorCode::kMissingColumn);
}

TEST(CanonicalizeTest, AurocRelations) {
  Rng rng(302);
  const DetectorManifest m = ParseManifest(
      "[q]\norientation = quality-high\nclass = external\n"
      "[a]\norientation = anomaly-high\nclass = external\n");
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = ::stare::testing::RandomInstance(rng, 4, 60);
    const size_t n = inst.scores.size();
    std::vector<std::string> ids;
    std::vector<double> values;
    for (size_t i = 0; i < n; ++i) {
      ids.push_back("r" + std::to_string(i));
      values.push_back(inst.scores[i]);
      values.push_back(inst.scores[i]);
    }
    const ScoreTable raw(ids, {"q", "a"}, values);
    const ScoreTable c = CanonicalizeOrientation(raw, m);
    const double raw_auc = Auroc(raw.column(0), inst.labels);
    // Half-credit ties make the complement exact even with ties.
    EXPECT_NEAR(Auroc(c.column(0), inst.labels), 1.0 - raw_auc, 1e-12);
    EXPECT_EQ(Auroc(c.column(1), inst.labels), raw_auc);
  }
}

ScoreTable Sequential(size_t n) {
  std::vector<std::string> ids;
  std::vector<double> v;
  for (size_t i = 0; i < n; ++i) {
    ids.push_back("s" + std::to_string(i));
    v.push_back(static_cast<double>(i));
  }
  return ScoreTable(ids, {"d"}, v, ScoreState::kCanonical);
}

TEST(CalibrationSplitTest, Counts) {
  const CalibrationSplit s = SampleCalibrationSplit(Sequential(100), 0.1, 5);
  EXPECT_EQ(s.reference.size(), 10u);
  EXPECT_EQ(s.evaluation.num_samples(), 90u);
  EXPECT_EQ(s.reference.source(), ReferenceSource::kSampledSplit);
  EXPECT_EQ(ReferenceRowCount(15, 0.1), 2u);  // 1.5 rounds up.
  EXPECT_EQ(ReferenceRowCount(25, 0.1), 3u);  // 2.5 rounds up.
}

TEST(CalibrationSplitTest, Deterministic) {
  const ScoreTable t = Sequential(100);
  const CalibrationSplit a = SampleCalibrationSplit(t, 0.1, 77);
  const CalibrationSplit b = SampleCalibrationSplit(t, 0.1, 77);
  const CalibrationSplit c = SampleCalibrationSplit(t, 0.1, 78);
  EXPECT_EQ(a.reference_rows, b.reference_rows);
  EXPECT_EQ(a.evaluation_rows, b.evaluation_rows);
  EXPECT_NE(a.reference_rows, c.reference_rows);
}

TEST(CalibrationSplitTest, EmptySplit) {
  EXPECT_EQ(CodeOf([] { SampleCalibrationSplit(Sequential(5), 0.05, 1); }),
            ErrorCode::kEmptySplit);
  EXPECT_EQ(CodeOf([] { SampleCalibrationSplit(Sequential(2), 0.9, 1); }),
            ErrorCode::kEmptySplit);
}

TEST(CalibrationSplitProperty, ExactPartition) {
  Rng rng(303);
  for (int trial = 0; trial < 300; ++trial) {
    const size_t n = 2 + rng.UniformIndex(200);
    const double ratio = 0.01 + 0.98 * rng.Uniform01();
    const size_t m = ReferenceRowCount(n, ratio);
    if (m == 0 || m >= n) continue;
    const ScoreTable t = Sequential(n);
    const CalibrationSplit s = SampleCalibrationSplit(t, ratio, rng.NextU64());
    std::set<size_t> all(s.reference_rows.begin(), s.reference_rows.end());
    EXPECT_EQ(all.size(), m);
    for (size_t r : s.evaluation_rows) EXPECT_TRUE(all.insert(r).second);
    EXPECT_EQ(all.size(), n);
    EXPECT_TRUE(std::is_sorted(s.evaluation_rows.begin(),
                               s.evaluation_rows.end()));
    for (size_t i = 0; i < s.reference_rows.size(); ++i) {
      EXPECT_EQ(s.reference.table().at(i, 0),
                static_cast<double>(s.reference_rows[i]));
    }
    LabelVector lv{"is_hall", std::vector<uint8_t>(n)};
    for (size_t i = 0; i < n; ++i) lv.labels[i] = i % 2;
    const LabelVector ev = lv.SelectRows(s.evaluation_rows);
    for (size_t i = 0; i < ev.labels.size(); ++i) {
      EXPECT_EQ(ev.labels[i], s.evaluation_rows[i] % 2);
      EXPECT_EQ(s.evaluation.sample_ids()[i],
                "s" + std::to_string(s.evaluation_rows[i]));
    }
  }
}

TEST(ReferenceSetTest, RequiresCanonical) {
  EXPECT_EQ(CodeOf([] {
              ReferenceSet(ScoreTable({"a"}, {"d"}, {1.0}),
                           ReferenceSource::kHeldOutFile);
            }),
            ErrorCode::kNotCanonical);
}

TEST(ReferenceSetTest, LoadFromFileIsCanonical) {
  ::stare::testing::TempDir dir;
  ::stare::testing::WriteText(dir.path() / "held.csv",
                              "id,labse,seqlogprob\nh1,0.8,-3\nh2,0.6,-1\n");
  const ReferenceSet ref =
      LoadReferenceSet(dir.path() / "held.csv", Manifest(), TableFormat::kCsv);
  EXPECT_EQ(ref.size(), 2u);
  EXPECT_EQ(ref.source(), ReferenceSource::kHeldOutFile);
  EXPECT_EQ(ref.table().at(0, 0), -0.8);
  EXPECT_EQ(ref.table().at(0, 1), 3.0);
}

}  // namespace
}  // namespace stare
