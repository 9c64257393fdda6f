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

#include "retrolens/text/segment_counts.hpp"

#include <algorithm>

namespace retrolens::text {

std::vector<TimedPitch> label_transcript(const std::vector<corpus::TranscriptSentence>& transcript,
                                         const PitchClassifierProvider& classifier) {
  std::vector<TimedPitch> out;
  for (const auto& s : transcript) {
    if (!is_complete_sentence(s.text)) continue;
    out.push_back({s.start_ms, s.end_ms, classifier.classify(s.text).category,
                   static_cast<std::int64_t>(word_count(s.text))});
  }
  return out;
}

std::vector<PitchCounts> pitch_counts_per_segment(std::span<const TimedPitch> sentences,
                                                  std::span<const corpus::TimeSpan> segments,
                                                  const corpus::SessionClock& clock) {
  std::vector<PitchCounts> counts(segments.size(), PitchCounts{});
  for (const auto& s : sentences) {
    const double mid_epoch = clock.to_epoch(0) + static_cast<double>(s.start_ms + s.end_ms) / 2000.0;
    auto it = std::upper_bound(segments.begin(), segments.end(), mid_epoch,
                               [](double t, const corpus::TimeSpan& seg) { return t < static_cast<double>(seg.start); });
    if (it == segments.begin()) continue;
    --it;
    if (mid_epoch >= static_cast<double>(it->end)) continue;
    counts[static_cast<std::size_t>(it - segments.begin())][index_of(s.label)] += s.words;
  }
  return counts;
}

}  // namespace retrolens::text
