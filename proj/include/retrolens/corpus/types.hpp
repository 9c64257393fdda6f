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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace retrolens::corpus {

// Platform statistics are keyed by wall-clock epoch seconds (UTC); everything
// recorded from the media (transcript, frames, comments) is in milliseconds
// from session start. SessionClock is the only place the two meet.
using EpochSeconds = std::int64_t;
using SessionMs = std::int64_t;

struct TimeSpan {
  EpochSeconds start = 0;
  EpochSeconds end = 0;  // exclusive

  EpochSeconds duration() const { return end - start; }
  bool contains(EpochSeconds t) const { return t >= start && t < end; }
  friend bool operator==(const TimeSpan&, const TimeSpan&) = default;
};

// The 14 per-minute statistics retrieved from the platform back-end, in CSV
// column order.
enum class Metric : std::size_t {
  kSalesAmount,
  kSalesVolume,
  kGpm,
  kUvValue,
  kEntries,
  kDepartures,
  kLikes,
  kComments,
  kSubscribes,
  kConversionRate,
  kAvgStaySeconds,
  kCancels,
  kExposureClickRatio,
  kClickTurnoverRatio,
};

inline constexpr std::size_t kMetricCount = 14;

inline constexpr std::array<std::string_view, kMetricCount> kMetricNames = {
    "sales_amount", "sales_volume", "gpm",        "uv_value",         "entries",
    "departures",   "likes",        "comments",   "subscribes",       "conversion_rate",
    "avg_stay_seconds", "cancels",  "exposure_click_ratio", "click_turnover_ratio",
};

constexpr std::string_view metric_name(Metric m) { return kMetricNames[static_cast<std::size_t>(m)]; }
constexpr bool is_ratio(Metric m) {
  return m == Metric::kConversionRate || m == Metric::kExposureClickRatio || m == Metric::kClickTurnoverRatio;
}
std::optional<Metric> metric_from_name(std::string_view name);

struct StatsRow {
  EpochSeconds minute_ts = 0;
  std::array<double, kMetricCount> values{};

  double operator[](Metric m) const { return values[static_cast<std::size_t>(m)]; }
  double& operator[](Metric m) { return values[static_cast<std::size_t>(m)]; }
  friend bool operator==(const StatsRow&, const StatsRow&) = default;
};

struct Shift {
  EpochSeconds start = 0;
  EpochSeconds end = 0;
  friend bool operator==(const Shift&, const Shift&) = default;
};

struct Streamer {
  std::string streamer_id;
  std::string display_name;
  std::vector<Shift> shifts;
  friend bool operator==(const Streamer&, const Streamer&) = default;
};

struct MerchandiseEntry {
  std::string merchandise_id;
  std::string title;
  double price = 0.0;
  EpochSeconds launch_ts = 0;
  int batch_id = 0;
  std::optional<std::string> thumbnail_path;
  friend bool operator==(const MerchandiseEntry&, const MerchandiseEntry&) = default;
};

// Paths as written in the manifest, relative to the session directory.
struct SessionFiles {
  std::string stats = "stats.csv";
  std::string transcript = "transcript.jsonl";
  std::string audio = "audio.wav";
  std::string frames = "frames.jsonl";
  std::string comments = "comments.jsonl";
  friend bool operator==(const SessionFiles&, const SessionFiles&) = default;
};

struct SessionManifest {
  std::string session_id;
  EpochSeconds start_ts = 0;
  EpochSeconds end_ts = 0;
  std::vector<Streamer> streamers;
  std::vector<MerchandiseEntry> merchandise;
  SessionFiles files;
  std::optional<std::string> replay_path;

  TimeSpan span() const { return {start_ts, end_ts}; }
  friend bool operator==(const SessionManifest&, const SessionManifest&) = default;
};

struct TranscriptSentence {
  SessionMs start_ms = 0;
  SessionMs end_ms = 0;
  std::string text;
  std::string streamer_id;
  friend bool operator==(const TranscriptSentence&, const TranscriptSentence&) = default;
};

enum class Expression { kAngry, kDisgust, kFear, kHappy, kSad, kSurprise, kNeutral };
inline constexpr std::size_t kExpressionCount = 7;
inline constexpr std::array<std::string_view, kExpressionCount> kExpressionNames = {
    "angry", "disgust", "fear", "happy", "sad", "surprise", "neutral"};
constexpr std::string_view expression_name(Expression e) { return kExpressionNames[static_cast<std::size_t>(e)]; }

struct BoundingBox {
  double x = 0, y = 0, w = 0, h = 0;
  double area() const { return w * h; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Face {
  BoundingBox bbox;
  std::array<double, kExpressionCount> expr_probs{};
  friend bool operator==(const Face&, const Face&) = default;
};

struct FrameAnnotation {
  SessionMs ts_ms = 0;
  int frame_w = 0;
  int frame_h = 0;
  std::vector<Face> faces;
  friend bool operator==(const FrameAnnotation&, const FrameAnnotation&) = default;
};

struct CommentEvent {
  SessionMs ts_ms = 0;
  std::string user_id;
  std::string text;
  friend bool operator==(const CommentEvent&, const CommentEvent&) = default;
};

// Mono PCM, samples scaled so that full scale is 1.0.
struct AudioBuffer {
  int sample_rate = 16000;
  std::vector<float> samples;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;
};

struct SessionCorpus {
  std::filesystem::path directory;
  SessionManifest manifest;
  std::vector<StatsRow> stats;
  std::vector<TranscriptSentence> transcript;
  std::vector<FrameAnnotation> frames;
  std::vector<CommentEvent> comments;
  AudioBuffer audio;
  // Hash over the raw bytes of every source file; keys derived caches.
  std::uint64_t source_hash = 0;
};

struct Clip {
  std::string clip_id;
  std::string session_id;
  TimeSpan span;
  int batch_id = 0;
  std::vector<std::string> merchandise_ids;
  friend bool operator==(const Clip&, const Clip&) = default;
};

class SessionClock {
 public:
  explicit SessionClock(EpochSeconds session_start) : start_(session_start) {}

  EpochSeconds session_start() const { return start_; }
  double to_epoch(SessionMs ms) const { return static_cast<double>(start_) + static_cast<double>(ms) / 1000.0; }
  SessionMs to_session_ms(EpochSeconds t) const { return (t - start_) * 1000; }
  // Index of the whole media second containing `t`.
  std::int64_t media_second(EpochSeconds t) const { return t - start_; }

 private:
  EpochSeconds start_;
};

}  // namespace retrolens::corpus
