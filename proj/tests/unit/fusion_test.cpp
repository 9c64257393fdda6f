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

#include <algorithm>

#include "retrolens/error.hpp"
#include "retrolens/fusion/grid.hpp"
#include "retrolens/fusion/model_matrix.hpp"
#include "retrolens/model/target.hpp"
#include "retrolens/text/classifier.hpp"
#include "support.hpp"

using namespace retrolens;
using namespace retrolens::fusion;
namespace rt = retrolens::testing;
using corpus::Clip;
using corpus::TimeSpan;

namespace {

Clip clip_of(corpus::EpochSeconds seconds) { return {"s_b0", "s", {1000, 1000 + seconds}, 0, {"m"}}; }

const rt::SynthFixture& fixture() { return rt::synth_fixture(); }

std::vector<SegmentAggregate> aggregates(int granularity, const rt::SynthFixture& f = fixture()) {
  const auto grid = build_grid(f.clips.front(), granularity);
  return aggregate_segments(*f.features, grid.segments, f.corpus->manifest.start_ts);
}

SegmentAggregate blank_aggregate() {
  SegmentAggregate a;
  a.seconds = 60;
  a.media_seconds = 60;
  a.volume = {-30, -20, -10};
  a.pitch = {150, 200, 250};
  a.speech_rate = {1, 4, 6};
  a.pause = {0, 0, 0.5};
  return a;
}

}  // namespace

TEST(Grid, ThirtyMinutesAtFiveGivesSix) {
  const auto g = build_grid(clip_of(1800), 5);
  ASSERT_EQ(g.segments.size(), 6u);
  EXPECT_EQ(g.granularity, 5);
  EXPECT_EQ(g.clip_id, "s_b0");
}

TEST(Grid, ThirtyTwoMinutesLeavesAShortLastSegment) {
  const auto g = build_grid(clip_of(1920), 5);
  ASSERT_EQ(g.segments.size(), 7u);
  EXPECT_EQ(g.segments.back().duration(), 120);
}

TEST(Grid, ThirtySecondClipIsOneShortSegment) {
  const auto g = build_grid(clip_of(30), 1);
  ASSERT_EQ(g.segments.size(), 1u);
  EXPECT_EQ(g.segments[0], (TimeSpan{1000, 1030}));
}

TEST(Grid, ContiguousAndCoveringForAnyLength) {
  for (corpus::EpochSeconds len : {1, 59, 60, 61, 299, 300, 301, 3599, 7200})
    for (int g : {1, 5}) {
      const auto grid = build_grid(clip_of(len), g);
      EXPECT_EQ(grid.segments.front().start, 1000);
      EXPECT_EQ(grid.segments.back().end, 1000 + len);
      for (std::size_t i = 0; i < grid.segments.size(); ++i) {
        EXPECT_LE(grid.segments[i].duration(), 60 * g);
        EXPECT_GT(grid.segments[i].duration(), 0);
        if (i > 0) EXPECT_EQ(grid.segments[i].start, grid.segments[i - 1].end);
        if (i + 1 < grid.segments.size()) EXPECT_EQ(grid.segments[i].duration(), 60 * g);
      }
    }
}

TEST(Grid, RejectsOtherGranularitiesAndEmptyClips) {
  try {
    build_grid(clip_of(600), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
  }
  try {
    build_grid(clip_of(0), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kClipTooShort);
  }
}

TEST(SegmentVectors, IdenticalSegmentsAllNormalizeToHalf) {
  std::vector<SegmentAggregate> a(5, blank_aggregate());
  for (auto& s : a) s.pitch_words = {3, 1, 4, 1, 5, 9};
  const auto v = segment_vectors(a);
  for (const auto& s : v)
    for (double x : s.values) EXPECT_EQ(x, 0.5);
}

TEST(SegmentVectors, LoneSellingSegment) {
  std::vector<SegmentAggregate> a(4, blank_aggregate());
  a[2].pitch_words = {0, 0, 17, 0, 0, 0};
  const auto v = segment_vectors(a);
  const std::vector<double> text(v[2].values.begin() + kAudioBlock, v[2].values.begin() + kAudioBlock + kTextBlock);
  EXPECT_EQ(text, (std::vector<double>{0, 0, 1, 0, 0, 0}));
  for (std::size_t s : {0u, 1u, 3u})
    for (std::size_t k = kAudioBlock; k < kAudioBlock + kTextBlock; ++k) EXPECT_EQ(v[s].values[k], 0.0);
}

TEST(SegmentVectors, BlocksAreNormalizedIndependentlyToUnitRange) {
  const auto agg = aggregates(1);
  const auto v = segment_vectors(agg);
  ASSERT_EQ(v.size(), 30u);
  EXPECT_EQ(segment_vector_names().size(), kSegmentDims);
  const std::array<std::pair<std::size_t, std::size_t>, 3> blocks = {
      {{0, kAudioBlock}, {kAudioBlock, kAudioBlock + kTextBlock}, {kAudioBlock + kTextBlock, kSegmentDims}}};
  for (auto [lo, hi] : blocks) {
    double mn = 1e300, mx = -1e300, rmn = 1e300, rmx = -1e300;
    for (const auto& s : v)
      for (std::size_t k = lo; k < hi; ++k) {
        EXPECT_GE(s.values[k], 0.0);
        EXPECT_LE(s.values[k], 1.0);
        mn = std::min(mn, s.values[k]);
        mx = std::max(mx, s.values[k]);
        rmn = std::min(rmn, s.raw[k]);
        rmx = std::max(rmx, s.raw[k]);
      }
    EXPECT_EQ(mn, 0.0);
    EXPECT_EQ(mx, 1.0);
    // Oracle: straight min-max of the raw block.
    for (const auto& s : v)
      for (std::size_t k = lo; k < hi; ++k) EXPECT_NEAR(s.values[k], (s.raw[k] - rmn) / (rmx - rmn), 1e-12);
  }
  for (std::size_t s = 0; s < agg.size(); ++s) EXPECT_EQ(v[s].raw, raw_segment_vector(agg[s]));
}

TEST(SegmentVectors, RawVectorLayout) {
  auto a = blank_aggregate();
  a.pitch_words = {1, 2, 3, 4, 5, 6};
  a.expression.histogram = {0.1, 0, 0, 0.5, 0, 0, 0.2};
  const auto r = raw_segment_vector(a);
  const std::array<double, kSegmentDims> expected = {-30, -20, -10, 150, 200, 250, 1, 4, 6, 0, 0, 0.5,
                                                     1,   2,   3,   4,   5,   6,   0.1, 0, 0, 0.5, 0, 0, 0.2};
  EXPECT_EQ(r, expected);
}

TEST(Aggregation, FiveMinuteAdditiveQuantitiesFoldOneMinuteValuesExactly) {
  const auto one = aggregates(1);
  const auto five = aggregates(5);
  ASSERT_EQ(one.size(), 30u);
  ASSERT_EQ(five.size(), 6u);
  for (std::size_t s = 0; s < five.size(); ++s) {
    text::PitchCounts words{};
    std::int64_t pause = 0, close = 0, total = 0, media = 0;
    std::array<std::int64_t, 3> camera{};
    for (std::size_t m = 5 * s; m < 5 * s + 5; ++m) {
      for (std::size_t k = 0; k < text::kCategoryCount; ++k) words[k] += one[m].pitch_words[k];
      pause += one[m].pause_total_ms;
      close += one[m].close_up_seconds();
      total += one[m].total_words;
      media += one[m].media_seconds;
      for (std::size_t k = 0; k < 3; ++k) camera[k] += one[m].camera_seconds[k];
    }
    EXPECT_EQ(five[s].pitch_words, words);
    EXPECT_EQ(five[s].pause_total_ms, pause);
    EXPECT_EQ(five[s].close_up_seconds(), close);
    EXPECT_EQ(five[s].total_words, total);
    EXPECT_EQ(five[s].media_seconds, media);
    EXPECT_EQ(five[s].camera_seconds, camera);
  }
}

TEST(Aggregation, AgreesWithTheFeatureSeriesDirectly) {
  const auto& f = fixture();
  const auto one = aggregates(1);
  // Pause total of minute 0 recomputed from the per-second integers.
  for (std::size_t m = 0; m < one.size(); ++m) {
    std::int64_t pause = 0;
    for (std::size_t s = 60 * m; s < 60 * m + 60; ++s) pause += f.features->pause_ms[s];
    EXPECT_EQ(one[m].pause_total_ms, pause);
  }
  EXPECT_EQ(f.features->media_seconds, 1800u);
}

TEST(Aggregation, UnionOfSpansEqualsSumOfParts) {
  const auto& f = fixture();
  const auto start = f.corpus->manifest.start_ts;
  const std::vector<TimeSpan> spans = {{start + 60, start + 180}, {start + 600, start + 660}};
  const auto u = aggregate_union(*f.features, spans, start);
  const auto parts = aggregate_segments(*f.features, spans, start);
  EXPECT_EQ(u.seconds, 180);
  EXPECT_EQ(u.pause_total_ms, parts[0].pause_total_ms + parts[1].pause_total_ms);
  EXPECT_EQ(u.total_words, parts[0].total_words + parts[1].total_words);
  EXPECT_EQ(u.close_up_seconds(), parts[0].close_up_seconds() + parts[1].close_up_seconds());
}

TEST(SessionFeatures, JsonRoundTripIsExact) {
  const auto& f = fixture();
  const auto back = SessionFeatures::from_json(f.features->to_json());
  EXPECT_TRUE(back == *f.features);
  EXPECT_EQ(back.to_json().dump(), f.features->to_json().dump());
}

TEST(SessionFeatures, MissingMediaTailHasNoCoverage) {
  corpus::SynthOptions o;
  o.minutes = 10;
  o.media_minutes = 6;
  const auto& f = rt::synth_fixture(o);
  EXPECT_EQ(f.features->media_seconds, 360u);
  const auto grid = build_grid(f.clips.front(), 1);
  const auto agg = aggregate_segments(*f.features, grid.segments, f.corpus->manifest.start_ts);
  for (std::size_t m = 0; m < agg.size(); ++m) EXPECT_EQ(agg[m].media_seconds, m < 6 ? 60 : 0) << m;
  EXPECT_EQ(agg[8].camera_seconds[static_cast<std::size_t>(frame::CameraPosition::kNoFace)], 60);
}

TEST(ModelMatrix, ThirtyMinuteSynthShapes) {
  const auto& f = fixture();
  const auto without_lag = build_model_matrix(*f.corpus, *f.features, f.clips.front(), "sales_amount", false);
  EXPECT_EQ(without_lag.rows(), 30u);
  EXPECT_EQ(without_lag.cols(), 19u);
  EXPECT_EQ(without_lag.y.size(), 30u);
  const auto with_lag = build_model_matrix(*f.corpus, *f.features, f.clips.front(), "sales_amount");
  EXPECT_EQ(with_lag.cols(), 20u);
  EXPECT_EQ(with_lag.columns.back(), kLagColumn);
  for (const auto& row : with_lag.x) EXPECT_EQ(row.size(), 20u);
}

TEST(ModelMatrix, TargetNeverAppearsAmongInputs) {
  const auto& f = fixture();
  for (auto name : model::kTargetNames) {
    const auto m = build_model_matrix(*f.corpus, *f.features, f.clips.front(), name);
    const auto metric = std::string(corpus::metric_name(model::target_metric(model::parse_target(name))));
    EXPECT_EQ(std::count(m.columns.begin(), m.columns.end(), metric), 0) << name;
    EXPECT_EQ(m.columns.size(), 20u);
    std::vector<std::string> sorted = m.columns;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
    // y is the target column of the statistics.
    for (std::size_t r = 0; r < m.rows(); ++r) EXPECT_EQ(m.y[r], f.corpus->stats[r][model::target_metric(model::parse_target(name))]);
  }
}

TEST(ModelMatrix, GpmTargetDropsGpm) {
  const auto& f = fixture();
  const auto m = build_model_matrix(*f.corpus, *f.features, f.clips.front(), "gpm");
  EXPECT_EQ(std::find(m.columns.begin(), m.columns.end(), "gpm"), m.columns.end());
  EXPECT_NE(std::find(m.columns.begin(), m.columns.end(), "sales_amount"), m.columns.end());
}

TEST(ModelMatrix, UnknownTargetThrows) {
  const auto& f = fixture();
  try {
    build_model_matrix(*f.corpus, *f.features, f.clips.front(), "velocity");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownTarget);
  }
}

TEST(ModelMatrix, ChannelColumnsMatchMinuteAggregates) {
  const auto& f = fixture();
  const auto m = build_model_matrix(*f.corpus, *f.features, f.clips.front(), "likes");
  const auto one = aggregates(1);
  const auto col = [&](std::string_view name) {
    return static_cast<std::size_t>(std::find(m.columns.begin(), m.columns.end(), name) - m.columns.begin());
  };
  for (std::size_t r = 0; r < m.rows(); ++r) {
    EXPECT_EQ(m.x[r][col("volume_median")], one[r].volume.median);
    EXPECT_EQ(m.x[r][col("pitch_median")], one[r].pitch.median);
    EXPECT_EQ(m.x[r][col("pause_seconds")], static_cast<double>(one[r].pause_total_ms) / 1000.0);
    EXPECT_EQ(m.x[r][col("pitch_word_count")], static_cast<double>(one[r].total_words));
    EXPECT_EQ(m.x[r][col("close_up_fraction")], static_cast<double>(one[r].close_up_seconds()) / 60.0);
    EXPECT_FALSE(m.media_missing[r]);
    EXPECT_EQ(m.lag_missing[r], r == 0);
    EXPECT_EQ(m.x[r][col(kLagColumn)], r == 0 ? 0.0 : m.y[r - 1]);
  }
  for (std::size_t c = 0; c < m.cols(); ++c) EXPECT_EQ(m.channels[c], *channel_of_column(m.columns[c]));
  EXPECT_EQ(channel_of_column("volume_median"), Channel::kAudio);
  EXPECT_EQ(channel_of_column("pitch_word_count"), Channel::kText);
  EXPECT_EQ(channel_of_column("close_up_fraction"), Channel::kFrame);
  EXPECT_EQ(channel_of_column(kLagColumn), Channel::kFeedback);
  EXPECT_EQ(channel_of_column("likes"), Channel::kFeedback);
  EXPECT_FALSE(channel_of_column("nonsense"));
}

TEST(ModelMatrix, MinutesWithoutMediaAreZeroFilledAndFlagged) {
  corpus::SynthOptions o;
  o.minutes = 10;
  o.media_minutes = 6;
  const auto& f = rt::synth_fixture(o);
  const auto m = build_model_matrix(*f.corpus, *f.features, f.clips.front(), "gpm");
  ASSERT_EQ(m.rows(), 10u);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    EXPECT_EQ(m.media_missing[r], r >= 6);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m.channels[c] == Channel::kFeedback) continue;
      if (r >= 6) EXPECT_EQ(m.x[r][c], 0.0);
    }
  }
}

TEST(ModelMatrix, LagComesFromThePreviousSessionMinuteAcrossClips) {
  corpus::SynthOptions o;
  o.minutes = 20;
  o.batches = 2;
  const auto& f = rt::synth_fixture(o);
  ASSERT_EQ(f.clips.size(), 2u);
  const auto& second = f.clips[1];
  const auto m = build_model_matrix(*f.corpus, *f.features, second, "entries");
  ASSERT_GT(m.rows(), 0u);
  EXPECT_FALSE(m.lag_missing[0]);
  const auto idx = static_cast<std::size_t>((second.span.start - f.corpus->manifest.start_ts) / 60);
  EXPECT_EQ(m.x[0].back(), f.corpus->stats[idx - 1][corpus::Metric::kEntries]);
}
