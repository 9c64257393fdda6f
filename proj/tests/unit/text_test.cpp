// Copyright 2026 The RetroLens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <fstream>
#include <numeric>

#include "retrolens/error.hpp"
#include "retrolens/text/classifier.hpp"
#include "retrolens/text/pitch.hpp"
#include "retrolens/text/segment_counts.hpp"
#include "retrolens/text/synth.hpp"
#include "support.hpp"

using namespace retrolens;
using namespace retrolens::text;

namespace {

std::vector<LabeledSentence> bundled_corpus() {
  return read_labeled_jsonl(retrolens::testing::read_file(std::string(RETROLENS_SOURCE_DIR) + "/data/pitch_corpus.jsonl"),
                            "pitch_corpus.jsonl");
}

const PitchClassifier& bundled_classifier() {
  static const PitchClassifier c = PitchClassifier::train(bundled_corpus());
  return c;
}

double accuracy(const PitchClassifier& c, const std::vector<LabeledSentence>& data) {
  std::size_t right = 0;
  for (const auto& s : data) right += c.classify(s.text).category == s.label ? 1 : 0;
  return static_cast<double>(right) / static_cast<double>(data.size());
}

// Fixed-category stub for segment counting.
class Constant final : public PitchClassifierProvider {
 public:
  explicit Constant(PitchCategory c) : c_(c) {}
  ClassifyResult classify(std::string_view) const override { return {c_, {}}; }
  std::string name() const override { return "constant"; }

 private:
  PitchCategory c_;
};

}  // namespace

TEST(PitchCategory, SixNamedValues) {
  EXPECT_EQ(kCategoryCount, 6u);
  for (std::size_t i = 0; i < kCategoryCount; ++i)
    EXPECT_EQ(category_from_name(kCategoryNames[i]), static_cast<PitchCategory>(i));
  EXPECT_FALSE(category_from_name("Chatter"));
}

TEST(BundledCorpus, HasSixHundredBalancedSentences) {
  const auto c = bundled_corpus();
  ASSERT_EQ(c.size(), 600u);
  std::array<int, kCategoryCount> per{};
  for (const auto& s : c) {
    ++per[index_of(s.label)];
    EXPECT_FALSE(s.text.empty());
  }
  for (int n : per) EXPECT_EQ(n, 100);
  // The file is exactly what the generator writes.
  EXPECT_EQ(write_labeled_jsonl(c), write_labeled_jsonl(generate_labeled_corpus(7, 100)));
}

TEST(Tokenize, LowercasesAndSplitsCjkIntoBigrams) {
  EXPECT_EQ(tokenize("Hello, WORLD 42!"), (std::vector<std::string>{"hello", "world", "42"}));
  EXPECT_EQ(tokenize("\xe5\xa4\xa7\xe5\xae\xb6\xe5\xa5\xbd"),
            (std::vector<std::string>{"\xe5\xa4\xa7\xe5\xae\xb6", "\xe5\xae\xb6\xe5\xa5\xbd"}));
  EXPECT_EQ(tokenize("\xe5\xa5\xbd"), (std::vector<std::string>{"\xe5\xa5\xbd"}));
  EXPECT_EQ(word_count("buy it now \xe5\xa4\xa7\xe5\xae\xb6"), 5u);
  EXPECT_FALSE(is_complete_sentence("ok"));
  EXPECT_TRUE(is_complete_sentence("ok then"));
}

TEST(Classifier, HeldOutAccuracyMeetsEngineeringTarget) {
  const auto& c = bundled_classifier();
  EXPECT_GE(c.report().mean_accuracy, 0.80);
  EXPECT_EQ(c.report().fold_accuracy.size(), 5u);
  // Fresh sentences the model never saw.
  EXPECT_GE(accuracy(c, generate_labeled_corpus(20261014, 50)), 0.80);
}

TEST(Classifier, UnderfilledCategoryIsRejected) {
  auto data = generate_labeled_corpus(3, 20);
  std::vector<LabeledSentence> trimmed;
  int urge = 0;
  for (const auto& s : data)
    if (s.label != PitchCategory::kUrge || urge++ < 2) trimmed.push_back(s);
  try {
    PitchClassifier::train(trimmed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCategoryUnderfilled);
  }
}

TEST(Classifier, SameSeedTrainsIdenticalParameters) {
  const auto data = generate_labeled_corpus(5, 20);
  TrainingOptions o;
  o.seed = 13;
  const auto a = PitchClassifier::train(data, o);
  const auto b = PitchClassifier::train(data, o);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}

TEST(Classifier, MemorizesTrainingSentences) {
  const auto& c = bundled_classifier();
  const auto data = bundled_corpus();
  int checked = 0;
  for (const auto& s : data) {
    if (s.label != PitchCategory::kUrge) continue;
    const auto r = c.classify(s.text);
    const auto top = std::max_element(r.probabilities.begin(), r.probabilities.end()) - r.probabilities.begin();
    EXPECT_EQ(static_cast<std::size_t>(top), index_of(r.category));
    if (++checked == 1) EXPECT_EQ(r.category, PitchCategory::kUrge) << s.text;
  }
  std::size_t urge_right = 0;
  for (const auto& s : data)
    if (s.label == PitchCategory::kUrge) urge_right += c.classify(s.text).category == PitchCategory::kUrge;
  EXPECT_GE(urge_right, 95u);
}

TEST(Classifier, EmptySentenceThrows) {
  const auto& c = bundled_classifier();
  for (const char* s : {"", "   ", "\t\n"}) {
    try {
      c.classify(s);
      FAIL() << "'" << s << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kEmptySentence);
    }
  }
}

TEST(Classifier, OutOfVocabularySentenceGetsAValidDistribution) {
  const auto r = bundled_classifier().classify("zzyzx quarklet flumph");
  double sum = 0.0;
  for (double p : r.probabilities) {
    EXPECT_GE(p, 0.0);
    sum += p;
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Classifier, ProbabilitiesSumToOneAndArgmaxWins) {
  const auto& c = bundled_classifier();
  for (const auto& s : generate_labeled_corpus(99, 10)) {
    const auto r = c.classify(s.text);
    EXPECT_NEAR(std::accumulate(r.probabilities.begin(), r.probabilities.end(), 0.0), 1.0, 1e-9);
    const auto top = std::max_element(r.probabilities.begin(), r.probabilities.end()) - r.probabilities.begin();
    EXPECT_EQ(static_cast<std::size_t>(top), index_of(r.category));
  }
}

TEST(Classifier, WhitespacePaddingDoesNotChangeTheResult) {
  const auto& c = bundled_classifier();
  for (const auto& s : generate_labeled_corpus(17, 5)) {
    const auto a = c.classify(s.text);
    const auto b = c.classify("  \t" + s.text + " \n ");
    EXPECT_EQ(a.category, b.category);
    EXPECT_EQ(a.probabilities, b.probabilities);
  }
}

TEST(Classifier, CheckpointRoundTripPredictsIdentically) {
  const auto& c = bundled_classifier();
  const auto dir = retrolens::testing::fresh_dir("ckpt");
  c.save(dir / "c.json");
  const auto loaded = PitchClassifier::load(dir / "c.json");
  EXPECT_TRUE(loaded == c);
  for (const auto& s : generate_labeled_corpus(123, 20)) {
    const auto a = c.classify(s.text);
    const auto b = loaded.classify(s.text);
    EXPECT_EQ(a.category, b.category);
    EXPECT_EQ(a.probabilities, b.probabilities);
  }
  std::filesystem::remove_all(dir);
}

TEST(Folds, DependOnlyOnLabelsAndSeed) {
  std::vector<PitchCategory> labels;
  for (int i = 0; i < 63; ++i) labels.push_back(static_cast<PitchCategory>(i % 6));
  const auto a = stratified_folds(labels, 5, 7);
  EXPECT_EQ(a, stratified_folds(labels, 5, 7));
  EXPECT_NE(a, stratified_folds(labels, 5, 8));
  // Each fold holds a near-equal share of every class.
  for (std::size_t cls = 0; cls < 6; ++cls) {
    std::array<int, 5> per{};
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (index_of(labels[i]) == cls) ++per[a[i]];
    EXPECT_LE(*std::max_element(per.begin(), per.end()) - *std::min_element(per.begin(), per.end()), 1);
  }
}

TEST(SegmentCounts, TenWordSellingSentenceLandsInItsSegment) {
  const corpus::SessionClock clock(1000);
  std::vector<corpus::TimeSpan> segs;
  for (int i = 0; i < 5; ++i) segs.push_back({1000 + 60 * i, 1060 + 60 * i});
  const std::vector<TimedPitch> s = {{185000, 190000, PitchCategory::kSelling, 10}};
  const auto counts = pitch_counts_per_segment(s, segs, clock);
  EXPECT_EQ(counts[3], (PitchCounts{0, 0, 10, 0, 0, 0}));
  for (int i : {0, 1, 2, 4}) EXPECT_EQ(counts[i], PitchCounts{});
}

TEST(SegmentCounts, StraddlingSentenceGoesWhollyToItsMidpointSegment) {
  const corpus::SessionClock clock(0);
  const std::vector<corpus::TimeSpan> segs = {{0, 60}, {60, 120}};
  // 55 s to 67 s: midpoint 61 s.
  const std::vector<TimedPitch> s = {{55000, 67000, PitchCategory::kOrder, 7},
                                     {50000, 69000, PitchCategory::kUrge, 4}};  // midpoint 59.5 s
  const auto counts = pitch_counts_per_segment(s, segs, clock);
  EXPECT_EQ(counts[1], (PitchCounts{0, 0, 0, 7, 0, 0}));
  EXPECT_EQ(counts[0], (PitchCounts{0, 0, 0, 0, 4, 0}));
}

TEST(SegmentCounts, TotalsArePreservedAcrossSegments) {
  Rng rng(42);
  std::vector<TimedPitch> s;
  std::array<std::int64_t, kCategoryCount> expected{};
  corpus::SessionMs t = 0;
  for (int i = 0; i < 200; ++i) {
    const auto start = t + static_cast<corpus::SessionMs>(rng.uniform(100, 2000));
    const auto end = start + static_cast<corpus::SessionMs>(rng.uniform(500, 5000));
    const auto cat = static_cast<PitchCategory>(rng.index(6));
    const auto words = static_cast<std::int64_t>(1 + rng.index(15));
    s.push_back({start, end, cat, words});
    expected[index_of(cat)] += words;
    t = start;
  }
  std::vector<corpus::TimeSpan> segs;
  for (int i = 0; i * 60 < 1000; ++i) segs.push_back({i * 60, (i + 1) * 60});
  const auto counts = pitch_counts_per_segment(s, segs, corpus::SessionClock(0));
  std::array<std::int64_t, kCategoryCount> got{};
  for (const auto& c : counts)
    for (std::size_t k = 0; k < kCategoryCount; ++k) got[k] += c[k];
  EXPECT_EQ(got, expected);
}

TEST(SegmentCounts, LabelTranscriptDropsIncompleteSentences) {
  const std::vector<corpus::TranscriptSentence> t = {
      {0, 1000, "welcome", "a"}, {1000, 3000, "buy it now friends", "a"}, {3000, 4000, "  ok  ", "a"}};
  const auto labeled = label_transcript(t, Constant(PitchCategory::kUrge));
  ASSERT_EQ(labeled.size(), 1u);
  EXPECT_EQ(labeled[0].words, 4);
  EXPECT_EQ(labeled[0].label, PitchCategory::kUrge);
}

TEST(LabeledJsonl, RoundTripsAndRejectsUnknownLabels) {
  const auto data = generate_labeled_corpus(1, 3);
  const auto back = read_labeled_jsonl(write_labeled_jsonl(data), "x");
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back[i].text, data[i].text);
    EXPECT_EQ(back[i].label, data[i].label);
  }
  EXPECT_THROW(read_labeled_jsonl("{\"text\":\"a b\",\"label\":\"Gossip\"}\n", "x"), SchemaError);
}
