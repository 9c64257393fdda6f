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
#include <string>
#include <string_view>
#include <vector>

#include "retrolens/corpus/types.hpp"
#include "retrolens/fusion/features.hpp"
#include "retrolens/model/target.hpp"

namespace retrolens::fusion {

enum class Channel { kAudio, kText, kFrame, kFeedback };
inline constexpr std::size_t kChannelCount = 4;
inline constexpr std::array<std::string_view, kChannelCount> kChannelNames = {"audio", "text", "frame", "feedback"};
constexpr std::string_view channel_name(Channel c) { return kChannelNames[static_cast<std::size_t>(c)]; }
std::optional<Channel> channel_from_name(std::string_view name);

// Per-minute channel aggregates appended after the statistics columns.
inline constexpr std::array<std::string_view, 6> kChannelColumns = {
    "volume_median", "pitch_median", "speech_rate_median", "pause_seconds", "pitch_word_count", "close_up_fraction"};
inline constexpr std::string_view kLagColumn = "target_lag1";

// Channel owning a model-matrix column. Statistics and the lag column are
// feedback.
std::optional<Channel> channel_of_column(std::string_view column);

struct ModelMatrix {
  std::string clip_id;
  std::string target;
  std::vector<std::string> columns;
  std::vector<Channel> channels;  // parallel to columns
  std::vector<corpus::EpochSeconds> minute_ts;
  std::vector<std::vector<double>> x;  // rows
  std::vector<double> y;
  std::vector<bool> media_missing;  // minute had no media; channel columns zero-filled
  std::vector<bool> lag_missing;    // no previous minute; lag zero-filled
  bool lag_target = true;

  std::size_t rows() const { return x.size(); }
  std::size_t cols() const { return columns.size(); }
};

// One row per statistics minute inside the clip: the thirteen non-target
// statistics, six channel aggregates over that minute, and (when lag_target)
// the target's value one minute earlier in the session.
ModelMatrix build_model_matrix(const corpus::SessionCorpus& corpus, const SessionFeatures& features,
                               const corpus::Clip& clip, std::string_view target, bool lag_target = true);

}  // namespace retrolens::fusion
