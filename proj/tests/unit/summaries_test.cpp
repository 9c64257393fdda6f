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

#include <numeric>

#include "retrolens/error.hpp"
#include "retrolens/fusion/grid.hpp"
#include "retrolens/model/run.hpp"
#include "retrolens/model/summaries.hpp"
#include "support.hpp"

using namespace retrolens;
using namespace retrolens::model;
namespace rt = retrolens::testing;
using corpus::Metric;

namespace {

const std::vector<std::string> kFeatures = {"volume_median", "pitch_median", "pitch_word_count", "close_up_fraction",
                                            "likes"};

std::size_t ch(Channel c) { return static_cast<std::size_t>(c); }

corpus::SessionManifest manifest_with(std::vector<corpus::MerchandiseEntry> items) {
  corpus::SessionManifest m;
  m.session_id = "s";
  m.start_ts = 0;
  m.end_ts = 600;
  m.merchandise = std::move(items);
  return m;
}

const ModelRun& synth_run(const std::string& target) {
  static std::map<std::string, ModelRun> runs;
  auto& slot = runs[target];
  if (slot.run_id.empty()) {
    const auto& f = rt::synth_fixture();
    slot = run_model(fusion::build_model_matrix(*f.corpus, *f.features, f.clips.front(), target), 7);
  }
  return slot;
}

}  // namespace

TEST(Channels, SignedSumIsPositivePlusNegative) {
  const Matrix shap = {{2.0, -0.5, 0, 0, 0}, {0, 0, 0, 0, 0}};
  const auto rows = summarize_channels(shap, kFeatures, default_channel_map(kFeatures));
  const auto& audio = rows[0][ch(Channel::kAudio)];
  EXPECT_EQ(audio.sum, 1.5);
  EXPECT_EQ(audio.positive, 2.0);
  EXPECT_EQ(audio.negative, -0.5);
  for (const auto& p : rows[1]) EXPECT_EQ(p, ChannelPart{});
}

TEST(Channels, UnmappedFeatureIsRejected) {
  const std::vector<std::string> features = {"volume_median", "mystery"};
  const Matrix shap = {{1.0, 2.0}};
  try {
    summarize_channels(shap, features, default_channel_map(features));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnmappedFeature);
  }
}

TEST(Channels, SumsPlusBaseReconstructPredictionsOnSynth) {
  const auto& run = synth_run("gpm");
  const auto map = default_channel_map(run.features);
  ASSERT_EQ(map.size(), run.features.size());
  const auto rows = summarize_channels(run.shap, run.features, map);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double total = run.base_value;
    for (const auto& p : rows[r]) {
      total += p.sum;
      EXPECT_EQ(p.sum, p.positive + p.negative);
      EXPECT_GE(p.positive, 0.0);
      EXPECT_LE(p.negative, 0.0);
    }
    EXPECT_NEAR(total, run.predictions[r], 1e-6);
    // Recomputation from the matrix is bit-identical.
    std::array<double, kChannelCount> pos{}, neg{};
    for (std::size_t j = 0; j < run.features.size(); ++j) {
      const double v = run.shap[r][j];
      if (v > 0) pos[ch(run.channels[j])] += v;
      if (v < 0) neg[ch(run.channels[j])] += v;
    }
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      EXPECT_EQ(rows[r][c].positive, pos[c]);
      EXPECT_EQ(rows[r][c].negative, neg[c]);
    }
  }
}

TEST(Channels, SegmentAggregationSumsMinuteRows) {
  const Matrix shap = {{1, 2}, {3, 4}, {5, 6}};
  const std::vector<corpus::EpochSeconds> ts = {0, 60, 120};
  const std::vector<corpus::TimeSpan> segs = {{0, 120}, {120, 180}};
  EXPECT_EQ(aggregate_rows(shap, ts, segs), (Matrix{{4, 6}, {5, 6}}));
}

TEST(Merchandise, ProportionsAndPolarity) {
  const Matrix shap = {{3.0, 0, 0, 0, -1.0}};
  const auto manifest = manifest_with({{"m1", "Kettle", 19.9, 0, 0, std::nullopt}});
  const corpus::Clip clip{"s_b0", "s", {0, 60}, 0, {"m1"}};
  const std::vector<corpus::EpochSeconds> ts = {0};
  const std::vector<double> y = {12};
  const auto out = summarize_merchandise(shap, kFeatures, default_channel_map(kFeatures), ts, y, clip, manifest);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].proportions, (std::array<double, 4>{0.75, 0, 0, 0.25}));
  EXPECT_EQ(out[0].polarity, (std::array<int, 4>{1, 0, 0, -1}));
  EXPECT_EQ(out[0].price, 19.9);
  EXPECT_EQ(out[0].title, "Kettle");
  EXPECT_EQ(out[0].interval, clip.span);
}

TEST(Merchandise, IntervalsRunToTheNextLaunchAndAverageTheTarget) {
  const Matrix shap = {{1, 0, 0, 0, 0}, {1, 0, 0, 0, 0}, {0, 0, 2, 0, 0}, {0, 0, 0, 0, 0}};
  const auto manifest = manifest_with({{"m1", "A", 5, 0, 0, std::nullopt}, {"m2", "B", 7, 120, 0, std::nullopt}});
  const corpus::Clip clip{"s_b0", "s", {0, 240}, 0, {"m1", "m2"}};
  const std::vector<corpus::EpochSeconds> ts = {0, 60, 120, 180};
  const std::vector<double> gpm = {10, 20, 30, 40};
  const auto out = summarize_merchandise(shap, kFeatures, default_channel_map(kFeatures), ts, gpm, clip, manifest);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].interval, (corpus::TimeSpan{0, 120}));
  EXPECT_EQ(out[1].interval, (corpus::TimeSpan{120, 240}));
  EXPECT_EQ(out[0].averaged_target, 15.0);
  EXPECT_EQ(out[1].averaged_target, 35.0);
  EXPECT_EQ(out[0].channel_sums[ch(Channel::kAudio)], 2.0);
  EXPECT_EQ(out[1].channel_sums[ch(Channel::kText)], 2.0);
  EXPECT_EQ(out[0].rows + out[1].rows, 4u);
}

TEST(Merchandise, AllZeroSumsShareEqually) {
  const Matrix shap = {{0, 0, 0, 0, 0}};
  const auto manifest = manifest_with({{"m1", "A", 5, 0, 0, std::nullopt}});
  const corpus::Clip clip{"s_b0", "s", {0, 60}, 0, {"m1"}};
  const std::vector<corpus::EpochSeconds> ts = {0};
  const std::vector<double> y = {0};
  const auto out = summarize_merchandise(shap, kFeatures, default_channel_map(kFeatures), ts, y, clip, manifest);
  EXPECT_EQ(out[0].proportions, (std::array<double, 4>{0.25, 0.25, 0.25, 0.25}));
  EXPECT_EQ(out[0].polarity, (std::array<int, 4>{0, 0, 0, 0}));
}

TEST(Merchandise, SingleItemCoversTheSynthClip) {
  const auto& f = rt::synth_fixture();
  const auto& run = synth_run("sales_amount");
  auto clip = f.clips.front();
  clip.merchandise_ids.resize(1);
  const auto map = default_channel_map(run.features);
  const auto out = summarize_merchandise(run.shap, run.features, map, run.minute_ts, run.actual, clip, f.corpus->manifest);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].interval.end, clip.span.end);
  const auto rows = summarize_channels(run.shap, run.features, map);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    double total = 0.0;
    for (std::size_t r = 0; r < run.shap.size(); ++r)
      if (out[0].interval.contains(run.minute_ts[r]))
        for (std::size_t j = 0; j < run.features.size(); ++j)
          if (ch(run.channels[j]) == c) total += run.shap[r][j];
    EXPECT_EQ(out[0].channel_sums[c], total);
  }
}

TEST(Features, PositivesNegativesAndRanking) {
  const Matrix shap = {{1, 0, 0.5, 0, 0}, {-2, 0, 0, 0, 0}, {3, 0, 0, 0, 0}};
  const auto out = summarize_features(shap, kFeatures, default_channel_map(kFeatures), std::nullopt);
  ASSERT_EQ(out.size(), kFeatures.size());
  EXPECT_EQ(out[0].feature, "volume_median");
  EXPECT_EQ(out[0].positives, 4.0);
  EXPECT_EQ(out[0].negatives, -2.0);
  EXPECT_EQ(out[0].segment_values, (std::vector<double>{1, -2, 3}));
  EXPECT_EQ(out[1].feature, "pitch_word_count");
  EXPECT_EQ(out.back().positives, 0.0);
  EXPECT_EQ(out.back().negatives, 0.0);
  const auto audio = summarize_features(shap, kFeatures, default_channel_map(kFeatures), Channel::kAudio);
  ASSERT_EQ(audio.size(), 2u);
  for (const auto& a : audio) EXPECT_EQ(a.channel, Channel::kAudio);
}

TEST(Features, ChannelTotalsAgreeWithChannelSummary) {
  const auto& run = synth_run("likes");
  const auto map = default_channel_map(run.features);
  const auto rows = summarize_channels(run.shap, run.features, map);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const auto feats = summarize_features(run.shap, run.features, map, static_cast<Channel>(c));
    double fsum = 0.0, csum = 0.0;
    for (const auto& f : feats) {
      EXPECT_GE(f.positives, 0.0);
      EXPECT_LE(f.negatives, 0.0);
      fsum += f.positives - std::abs(f.negatives);
    }
    for (const auto& r : rows) csum += r[c].sum;
    EXPECT_NEAR(fsum, csum, 1e-9);
  }
}

TEST(Streamers, ViewsPartitionTheClip) {
  const auto& f = rt::synth_fixture();
  const auto& clip = f.clips.front();
  const auto out = streamer_summary(*f.corpus, *f.features, clip);
  ASSERT_EQ(out.size(), 2u);
  double entries = 0.0;
  for (const auto& r : f.corpus->stats)
    if (clip.span.contains(r.minute_ts)) entries += r[Metric::kEntries];
  EXPECT_EQ(out[0].views + out[1].views, entries);
  EXPECT_EQ(out[0].minutes + out[1].minutes, 30u);
  for (const auto& s : out) {
    EXPECT_GE(s.avg_online_rate, 0.0);
    EXPECT_LE(s.avg_online_rate, 1.0);
    EXPECT_GE(s.conversion_rate, 0.0);
    EXPECT_LE(s.conversion_rate, 1.0);
    EXPECT_GT(s.glyph.seconds, 0);
  }
}

TEST(Streamers, SingleStreamerSeesTheWholeClip) {
  const auto& f = rt::synth_fixture();
  auto corpus = *f.corpus;
  corpus.manifest.streamers.resize(1);
  corpus.manifest.streamers[0].shifts = {{corpus.manifest.start_ts, corpus.manifest.end_ts}};
  const auto out = streamer_summary(corpus, *f.features, f.clips.front());
  ASSERT_EQ(out.size(), 1u);
  double entries = 0.0, likes = 0.0, comments = 0.0;
  for (const auto& r : corpus.stats) {
    entries += r[Metric::kEntries];
    likes += r[Metric::kLikes];
    comments += r[Metric::kComments];
  }
  EXPECT_EQ(out[0].views, entries);
  EXPECT_NEAR(out[0].attractiveness, (likes + comments) / entries, 1e-12);
}

TEST(Streamers, ZeroEntriesGiveZeroAttractiveness) {
  const auto& f = rt::synth_fixture();
  auto corpus = *f.corpus;
  for (auto& r : corpus.stats) r[Metric::kEntries] = 0.0;
  for (const auto& s : streamer_summary(corpus, *f.features, f.clips.front())) {
    EXPECT_EQ(s.views, 0.0);
    EXPECT_EQ(s.attractiveness, 0.0);
  }
}

TEST(Streamers, NoShiftInClipIsAnError) {
  const auto& f = rt::synth_fixture();
  auto corpus = *f.corpus;
  for (auto& s : corpus.manifest.streamers) s.shifts.clear();
  try {
    streamer_summary(corpus, *f.features, f.clips.front());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoShiftInClip);
  }
}

TEST(Streamers, AttractivenessTermsFromConfig) {
  Config c;
  c.set("radar.attractiveness_terms", "likes, subscribes");
  const auto o = RadarOptions::from_config(c);
  EXPECT_EQ(o.attractiveness_terms, (std::vector<Metric>{Metric::kLikes, Metric::kSubscribes}));
  c.set("radar.attractiveness_terms", "likes, applause");
  EXPECT_THROW(RadarOptions::from_config(c), Error);
}
