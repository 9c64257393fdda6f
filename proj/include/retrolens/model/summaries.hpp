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

#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "retrolens/config.hpp"
#include "retrolens/corpus/types.hpp"
#include "retrolens/fusion/features.hpp"
#include "retrolens/fusion/model_matrix.hpp"
#include "retrolens/model/regressors.hpp"

namespace retrolens::model {

using fusion::Channel;
using fusion::kChannelCount;

using ChannelMap = std::map<std::string, Channel, std::less<>>;

// Maps every model-matrix column name to its channel.
ChannelMap default_channel_map(std::span<const std::string> features);

// Sums shap rows whose minute falls inside each segment.
Matrix aggregate_rows(const Matrix& shap, std::span<const corpus::EpochSeconds> minute_ts,
                      std::span<const corpus::TimeSpan> segments);

struct ChannelPart {
  double sum = 0.0;  // positive + negative
  double positive = 0.0;
  double negative = 0.0;
  friend bool operator==(const ChannelPart&, const ChannelPart&) = default;
};
using ChannelRow = std::array<ChannelPart, kChannelCount>;

// Throws UnmappedFeature when a feature has no channel.
std::vector<ChannelRow> summarize_channels(const Matrix& shap, std::span<const std::string> features,
                                           const ChannelMap& map);

struct MerchandiseSummary {
  std::string merchandise_id;
  std::string title;
  double price = 0.0;
  corpus::TimeSpan interval;
  std::size_t rows = 0;
  std::array<double, kChannelCount> channel_sums{};
  std::array<double, kChannelCount> proportions{};
  std::array<int, kChannelCount> polarity{};  // -1, 0, +1
  double averaged_target = 0.0;
};

// Intervals run from each launch to the next launch within the clip, the last
// to the clip end. Rows are attributed by minute_ts.
std::vector<MerchandiseSummary> summarize_merchandise(const Matrix& shap, std::span<const std::string> features,
                                                      const ChannelMap& map,
                                                      std::span<const corpus::EpochSeconds> minute_ts,
                                                      std::span<const double> target, const corpus::Clip& clip,
                                                      const corpus::SessionManifest& manifest);

struct FeatureSummary {
  std::string feature;
  Channel channel = Channel::kFeedback;
  double positives = 0.0;
  double negatives = 0.0;
  std::vector<double> segment_values;
};

// Features of the channel (all channels when empty), ordered by
// |positives| + |negatives| descending; ties keep column order.
std::vector<FeatureSummary> summarize_features(const Matrix& shap, std::span<const std::string> features,
                                               const ChannelMap& map, std::optional<Channel> channel);

struct RadarOptions {
  // Statistics summed in the numerator of attractiveness, per viewer entry.
  std::vector<corpus::Metric> attractiveness_terms = {corpus::Metric::kLikes, corpus::Metric::kComments};
  static RadarOptions from_config(const Config& config);
};

struct StreamerSummary {
  std::string streamer_id;
  std::string display_name;
  std::vector<corpus::TimeSpan> spans;  // shifts clipped to the clip
  std::size_t minutes = 0;
  double avg_online_rate = 0.0;
  double views = 0.0;
  double attractiveness = 0.0;
  double avg_stay = 0.0;
  double conversion_rate = 0.0;
  fusion::SegmentAggregate glyph;
};

// Streamers with at least one statistics minute inside the clip. Online
// count is the running sum of entries - departures from the clip start,
// scaled by its maximum over the clip. Throws NoShiftInClip when nobody is on
// air during the clip.
std::vector<StreamerSummary> streamer_summary(const corpus::SessionCorpus& corpus,
                                              const fusion::SessionFeatures& features, const corpus::Clip& clip,
                                              const RadarOptions& options = {});

}  // namespace retrolens::model
