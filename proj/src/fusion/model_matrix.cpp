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

#include "retrolens/fusion/model_matrix.hpp"

#include <algorithm>

#include "retrolens/error.hpp"

namespace retrolens::fusion {

std::optional<Channel> channel_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kChannelCount; ++i)
    if (kChannelNames[i] == name) return static_cast<Channel>(i);
  return std::nullopt;
}

std::optional<Channel> channel_of_column(std::string_view column) {
  if (column == kLagColumn || corpus::metric_from_name(column)) return Channel::kFeedback;
  if (column == "pitch_word_count") return Channel::kText;
  if (column == "close_up_fraction") return Channel::kFrame;
  if (std::find(kChannelColumns.begin(), kChannelColumns.end(), column) != kChannelColumns.end()) return Channel::kAudio;
  return std::nullopt;
}

ModelMatrix build_model_matrix(const corpus::SessionCorpus& corpus, const SessionFeatures& features,
                               const corpus::Clip& clip, std::string_view target, bool lag_target) {
  const auto option = model::parse_target(target);
  const auto target_metric = model::target_metric(option);
  ModelMatrix m;
  m.clip_id = clip.clip_id;
  m.target = std::string(target);
  m.lag_target = lag_target;
  for (std::size_t i = 0; i < corpus::kMetricCount; ++i)
    if (static_cast<corpus::Metric>(i) != target_metric) m.columns.emplace_back(corpus::kMetricNames[i]);
  for (auto c : kChannelColumns) m.columns.emplace_back(c);
  if (lag_target) m.columns.emplace_back(kLagColumn);
  for (const auto& c : m.columns) m.channels.push_back(*channel_of_column(c));

  std::vector<corpus::TimeSpan> minutes;
  std::vector<std::size_t> stat_index;
  for (std::size_t r = 0; r < corpus.stats.size(); ++r) {
    const auto ts = corpus.stats[r].minute_ts;
    if (!clip.span.contains(ts)) continue;
    minutes.push_back({ts, ts + 60});
    stat_index.push_back(r);
  }
  const auto aggregates = aggregate_segments(features, minutes, corpus.manifest.start_ts);

  for (std::size_t k = 0; k < minutes.size(); ++k) {
    const auto& row = corpus.stats[stat_index[k]];
    const auto& a = aggregates[k];
    std::vector<double> x;
    x.reserve(m.columns.size());
    for (std::size_t i = 0; i < corpus::kMetricCount; ++i)
      if (static_cast<corpus::Metric>(i) != target_metric) x.push_back(row.values[i]);
    const bool missing = a.media_seconds == 0;
    if (missing) {
      x.insert(x.end(), kChannelColumns.size(), 0.0);
    } else {
      x.push_back(a.volume.median);
      x.push_back(a.pitch.median);
      x.push_back(a.speech_rate.median);
      x.push_back(static_cast<double>(a.pause_total_ms) / 1000.0);
      x.push_back(static_cast<double>(a.total_words));
      x.push_back(static_cast<double>(a.close_up_seconds()) / static_cast<double>(a.media_seconds));
    }
    bool lag_missing = false;
    if (lag_target) {
      const auto r = stat_index[k];
      lag_missing = r == 0 || corpus.stats[r - 1].minute_ts != row.minute_ts - 60;
      x.push_back(lag_missing ? 0.0 : corpus.stats[r - 1][target_metric]);
    }
    m.minute_ts.push_back(row.minute_ts);
    m.x.push_back(std::move(x));
    m.y.push_back(row[target_metric]);
    m.media_missing.push_back(missing);
    m.lag_missing.push_back(lag_missing);
  }
  return m;
}

}  // namespace retrolens::fusion
