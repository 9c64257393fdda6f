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

#include "retrolens/fusion/features.hpp"

#include <algorithm>
#include <cmath>

#include "retrolens/error.hpp"
#include "retrolens/numeric.hpp"

namespace retrolens::fusion {
namespace {

using nlohmann::json;

Spread spread_of(std::vector<double> values) {
  if (values.empty()) return {};
  std::sort(values.begin(), values.end());
  return {values.front(), quantile_sorted(values, 0.5), values.back()};
}

json optional_expressions_to_json(const std::vector<std::optional<corpus::Expression>>& v) {
  json out = json::array();
  for (const auto& e : v) out.push_back(e ? static_cast<int>(*e) : -1);
  return out;
}

}  // namespace

FeatureConfig FeatureConfig::from_config(const Config& config) {
  return {audio::AudioConfig::from_config(config), frame::FrameConfig::from_config(config)};
}

json SessionFeatures::to_json() const {
  json pauses = json::array();
  for (const auto& p : audio.pauses) pauses.push_back({p.start_ms, p.end_ms});
  json pitch = json::array();
  for (const auto& p : pitches) pitch.push_back({p.start_ms, p.end_ms, static_cast<int>(p.label), p.words});
  json camera = json::array();
  for (auto c : frames.camera_position) camera.push_back(static_cast<int>(c));
  return {{"format", kFormat},
          {"version", kVersion},
          {"session_id", session_id},
          {"source_hash", hex64(source_hash)},
          {"classifier", classifier},
          {"media_seconds", media_seconds},
          {"volume_db", audio.volume_db},
          {"pitch_hz", audio.pitch_hz},
          {"speech_rate", audio.speech_rate},
          {"pauses", pauses},
          {"pause_ms", pause_ms},
          {"pitches", pitch},
          {"expressions", optional_expressions_to_json(frames.dominant_expression)},
          {"camera", camera}};
}

SessionFeatures SessionFeatures::from_json(const json& doc) {
  if (doc.value("format", std::string()) != kFormat || doc.value("version", 0) != kVersion)
    throw Error(ErrorCode::kSchemaViolation, "not a version 1 session feature document");
  SessionFeatures f;
  try {
    f.session_id = doc.at("session_id").get<std::string>();
    f.source_hash = std::stoull(doc.at("source_hash").get<std::string>(), nullptr, 16);
    f.classifier = doc.at("classifier").get<std::string>();
    f.media_seconds = doc.at("media_seconds").get<std::size_t>();
    f.audio.volume_db = doc.at("volume_db").get<std::vector<double>>();
    f.audio.pitch_hz = doc.at("pitch_hz").get<std::vector<double>>();
    f.audio.speech_rate = doc.at("speech_rate").get<std::vector<double>>();
    for (const auto& p : doc.at("pauses")) f.audio.pauses.push_back({p.at(0).get<std::int64_t>(), p.at(1).get<std::int64_t>()});
    f.pause_ms = doc.at("pause_ms").get<std::vector<std::int64_t>>();
    for (const auto& p : doc.at("pitches")) {
      const int label = p.at(2).get<int>();
      if (label < 0 || label >= static_cast<int>(text::kCategoryCount)) throw Error(ErrorCode::kSchemaViolation, "bad pitch label");
      f.pitches.push_back({p.at(0).get<std::int64_t>(), p.at(1).get<std::int64_t>(), static_cast<text::PitchCategory>(label),
                           p.at(3).get<std::int64_t>()});
    }
    for (const auto& e : doc.at("expressions")) {
      const int v = e.get<int>();
      if (v >= static_cast<int>(corpus::kExpressionCount)) throw Error(ErrorCode::kSchemaViolation, "bad expression");
      f.frames.dominant_expression.push_back(v < 0 ? std::nullopt
                                                   : std::optional<corpus::Expression>(static_cast<corpus::Expression>(v)));
    }
    for (const auto& c : doc.at("camera")) {
      const int v = c.get<int>();
      if (v < 0 || v > 2) throw Error(ErrorCode::kSchemaViolation, "bad camera position");
      f.frames.camera_position.push_back(static_cast<frame::CameraPosition>(v));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("malformed session feature document: ") + e.what());
  }
  const auto n = f.media_seconds;
  if (f.audio.volume_db.size() != n || f.audio.pitch_hz.size() != n || f.audio.speech_rate.size() != n ||
      f.pause_ms.size() != n || f.frames.dominant_expression.size() != n || f.frames.camera_position.size() != n)
    throw Error(ErrorCode::kSchemaViolation, "session feature series lengths disagree");
  return f;
}

bool operator==(const SessionFeatures& a, const SessionFeatures& b) {
  return a.session_id == b.session_id && a.source_hash == b.source_hash && a.classifier == b.classifier &&
         a.media_seconds == b.media_seconds && a.audio.volume_db == b.audio.volume_db &&
         a.audio.pitch_hz == b.audio.pitch_hz && a.audio.speech_rate == b.audio.speech_rate &&
         a.audio.pauses == b.audio.pauses && a.pause_ms == b.pause_ms && a.pitches == b.pitches &&
         a.frames.dominant_expression == b.frames.dominant_expression &&
         a.frames.camera_position == b.frames.camera_position;
}

SessionFeatures extract_session_features(const corpus::SessionCorpus& corpus,
                                         const text::PitchClassifierProvider& classifier,
                                         const FeatureConfig& config) {
  SessionFeatures f;
  f.session_id = corpus.manifest.session_id;
  f.source_hash = corpus.source_hash;
  f.classifier = classifier.name();
  if (!corpus.audio.samples.empty()) {
    f.audio = audio::extract_audio_features(corpus.audio, config.audio);
    f.media_seconds = f.audio.volume_db.size();
  }
  f.pause_ms.assign(f.media_seconds, 0);
  for (const auto& p : f.audio.pauses) {
    for (auto s = p.start_ms / 1000; s * 1000 < p.end_ms && static_cast<std::size_t>(s) < f.media_seconds; ++s) {
      const auto lo = std::max(p.start_ms, s * 1000);
      const auto hi = std::min(p.end_ms, (s + 1) * 1000);
      if (hi > lo) f.pause_ms[static_cast<std::size_t>(s)] += hi - lo;
    }
  }
  f.pitches = text::label_transcript(corpus.transcript, classifier);
  f.frames = frame::per_second_frame_features(corpus.frames, f.media_seconds, config.frame);
  return f;
}

namespace {

// Aggregates the seconds of every piece into one SegmentAggregate.
SegmentAggregate aggregate_pieces(const SessionFeatures& features, std::span<const corpus::TimeSpan> pieces,
                                  const corpus::SessionClock& clock, const text::PitchCounts& words) {
  SegmentAggregate a;
  if (!pieces.empty()) a.span = {pieces.front().start, pieces.back().end};
  std::vector<double> vol, pitch, rate, pause;
  std::vector<std::optional<corpus::Expression>> expressions;
  for (const auto& piece : pieces) {
    a.seconds += piece.duration();
    for (auto t = piece.start; t < piece.end; ++t) {
      const auto s = clock.media_second(t);
      if (s < 0 || static_cast<std::size_t>(s) >= features.media_seconds) {
        expressions.emplace_back();
        ++a.camera_seconds[static_cast<std::size_t>(frame::CameraPosition::kNoFace)];
        continue;
      }
      const auto i = static_cast<std::size_t>(s);
      ++a.media_seconds;
      vol.push_back(features.audio.volume_db[i]);
      if (features.audio.pitch_hz[i] > 0.0) pitch.push_back(features.audio.pitch_hz[i]);
      rate.push_back(features.audio.speech_rate[i]);
      pause.push_back(static_cast<double>(features.pause_ms[i]) / 1000.0);
      a.pause_total_ms += features.pause_ms[i];
      expressions.push_back(features.frames.dominant_expression[i]);
      ++a.camera_seconds[static_cast<std::size_t>(features.frames.camera_position[i])];
    }
  }
  a.voiced_seconds = static_cast<std::int64_t>(pitch.size());
  a.volume = spread_of(std::move(vol));
  a.pitch = spread_of(std::move(pitch));
  a.speech_rate = spread_of(std::move(rate));
  a.pause = spread_of(std::move(pause));
  a.pitch_words = words;
  for (auto w : a.pitch_words) a.total_words += w;
  a.expression = frame::expression_summary(expressions);
  return a;
}

}  // namespace

std::vector<SegmentAggregate> aggregate_segments(const SessionFeatures& features,
                                                 std::span<const corpus::TimeSpan> spans,
                                                 corpus::EpochSeconds session_start) {
  const corpus::SessionClock clock(session_start);
  const auto words = text::pitch_counts_per_segment(features.pitches, spans, clock);
  std::vector<SegmentAggregate> out;
  out.reserve(spans.size());
  for (std::size_t k = 0; k < spans.size(); ++k) out.push_back(aggregate_pieces(features, spans.subspan(k, 1), clock, words[k]));
  return out;
}

SegmentAggregate aggregate_union(const SessionFeatures& features, std::span<const corpus::TimeSpan> spans,
                                 corpus::EpochSeconds session_start) {
  const corpus::SessionClock clock(session_start);
  text::PitchCounts total{};
  for (const auto& c : text::pitch_counts_per_segment(features.pitches, spans, clock))
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += c[i];
  return aggregate_pieces(features, spans, clock, total);
}

std::array<double, kSegmentDims> raw_segment_vector(const SegmentAggregate& a) {
  std::array<double, kSegmentDims> v{};
  std::size_t i = 0;
  for (const Spread* s : {&a.volume, &a.pitch, &a.speech_rate, &a.pause}) {
    v[i++] = s->min;
    v[i++] = s->median;
    v[i++] = s->max;
  }
  for (auto w : a.pitch_words) v[i++] = static_cast<double>(w);
  for (double h : a.expression.histogram) v[i++] = h;
  return v;
}

std::vector<SegmentVector> segment_vectors(std::span<const SegmentAggregate> aggregates) {
  std::vector<SegmentVector> out(aggregates.size());
  for (std::size_t k = 0; k < aggregates.size(); ++k) out[k].raw = raw_segment_vector(aggregates[k]);
  constexpr std::array<std::pair<std::size_t, std::size_t>, 3> kBlocks = {
      {{0, kAudioBlock}, {kAudioBlock, kAudioBlock + kTextBlock}, {kAudioBlock + kTextBlock, kSegmentDims}}};
  for (auto [lo, hi] : kBlocks) {
    double mn = 0.0, mx = 0.0;
    bool first = true;
    for (const auto& v : out)
      for (std::size_t j = lo; j < hi; ++j) {
        mn = first ? v.raw[j] : std::min(mn, v.raw[j]);
        mx = first ? v.raw[j] : std::max(mx, v.raw[j]);
        first = false;
      }
    // A block that is the same vector in every segment carries no contrast; it maps to 0.5.
    const bool constant = std::all_of(out.begin(), out.end(), [&](const SegmentVector& v) {
      return std::equal(v.raw.begin() + lo, v.raw.begin() + hi, out.front().raw.begin() + lo);
    });
    for (auto& v : out)
      for (std::size_t j = lo; j < hi; ++j)
        v.values[j] = (!constant && mx > mn) ? (v.raw[j] - mn) / (mx - mn) : 0.5;
  }
  return out;
}

std::vector<std::string> segment_vector_names() {
  std::vector<std::string> names;
  for (const char* f : {"volume", "pitch", "speech_rate", "pause"})
    for (const char* s : {"min", "median", "max"}) names.push_back(std::string(f) + "_" + s);
  for (auto c : text::kCategoryNames) names.push_back("words_" + std::string(c));
  for (auto e : corpus::kExpressionNames) names.push_back("face_" + std::string(e));
  return names;
}

}  // namespace retrolens::fusion
