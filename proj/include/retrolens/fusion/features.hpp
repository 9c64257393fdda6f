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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "retrolens/audio/features.hpp"
#include "retrolens/config.hpp"
#include "retrolens/corpus/types.hpp"
#include "retrolens/frame/features.hpp"
#include "retrolens/text/segment_counts.hpp"

namespace retrolens::fusion {

struct FeatureConfig {
  audio::AudioConfig audio;
  frame::FrameConfig frame;
  static FeatureConfig from_config(const Config& config);
};

// Everything extracted from one session's media, on the per-second media
// timeline (second k covers session time [k s, k+1 s)). Media coverage is
// defined by the audio track.
struct SessionFeatures {
  static constexpr std::string_view kFormat = "retrolens.session_features";
  static constexpr int kVersion = 1;

  std::string session_id;
  std::uint64_t source_hash = 0;
  std::string classifier;
  std::size_t media_seconds = 0;
  audio::AudioFeatureSeries audio;
  std::vector<std::int64_t> pause_ms;  // per second, integer so segment totals fold exactly
  std::vector<text::TimedPitch> pitches;
  frame::FrameFeatureSeries frames;

  nlohmann::json to_json() const;
  static SessionFeatures from_json(const nlohmann::json& doc);
  friend bool operator==(const SessionFeatures& a, const SessionFeatures& b);
};

SessionFeatures extract_session_features(const corpus::SessionCorpus& corpus,
                                         const text::PitchClassifierProvider& classifier,
                                         const FeatureConfig& config = {});

struct Spread {
  double min = 0.0, median = 0.0, max = 0.0;
  friend bool operator==(const Spread&, const Spread&) = default;
};

// Channel aggregates over one time span.
struct SegmentAggregate {
  corpus::TimeSpan span;
  std::int64_t seconds = 0;        // span length
  std::int64_t media_seconds = 0;  // seconds with audio coverage
  Spread volume;                   // over covered seconds
  Spread pitch;                    // over voiced seconds only
  Spread speech_rate;
  Spread pause;  // per-second pause seconds
  std::int64_t voiced_seconds = 0;
  std::int64_t pause_total_ms = 0;
  text::PitchCounts pitch_words{};
  std::int64_t total_words = 0;
  frame::ExpressionSummary expression;
  std::array<std::int64_t, 3> camera_seconds{};  // by CameraPosition; uncovered seconds count as NoFace
  std::int64_t close_up_seconds() const { return camera_seconds[static_cast<std::size_t>(frame::CameraPosition::kCloseUp)]; }
};

std::vector<SegmentAggregate> aggregate_segments(const SessionFeatures& features,
                                                 std::span<const corpus::TimeSpan> spans,
                                                 corpus::EpochSeconds session_start);

// One aggregate over several sorted, disjoint spans.
SegmentAggregate aggregate_union(const SessionFeatures& features, std::span<const corpus::TimeSpan> spans,
                                 corpus::EpochSeconds session_start);

inline constexpr std::size_t kAudioBlock = 12;
inline constexpr std::size_t kTextBlock = 6;
inline constexpr std::size_t kFaceBlock = 7;
inline constexpr std::size_t kSegmentDims = kAudioBlock + kTextBlock + kFaceBlock;

// Concatenated block values before normalization, in the order
// volume{min,median,max}, pitch{...}, speech_rate{...}, pause{...},
// six pitch word counts, seven expression fractions.
std::array<double, kSegmentDims> raw_segment_vector(const SegmentAggregate& aggregate);

struct SegmentVector {
  std::array<double, kSegmentDims> values{};  // block-normalized
  std::array<double, kSegmentDims> raw{};
};

// Each block is min-max scaled with one (min, max) taken over all of its
// entries across the clip's segments; a constant block maps to 0.5.
std::vector<SegmentVector> segment_vectors(std::span<const SegmentAggregate> aggregates);

std::vector<std::string> segment_vector_names();

}  // namespace retrolens::fusion
