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
#include <vector>

#include "retrolens/corpus/types.hpp"
#include "retrolens/text/classifier.hpp"

namespace retrolens::text {

struct TimedPitch {
  corpus::SessionMs start_ms = 0;
  corpus::SessionMs end_ms = 0;
  PitchCategory label = PitchCategory::kTraffic;
  std::int64_t words = 0;
  friend bool operator==(const TimedPitch&, const TimedPitch&) = default;
};

using PitchCounts = std::array<std::int64_t, kCategoryCount>;

// Drops incomplete sentences and labels the rest.
std::vector<TimedPitch> label_transcript(const std::vector<corpus::TranscriptSentence>& transcript,
                                         const PitchClassifierProvider& classifier);

// Each sentence's words accrue wholly to the segment containing its temporal
// midpoint; sentences whose midpoint falls outside every segment are ignored.
std::vector<PitchCounts> pitch_counts_per_segment(std::span<const TimedPitch> sentences,
                                                  std::span<const corpus::TimeSpan> segments,
                                                  const corpus::SessionClock& clock);

}  // namespace retrolens::text
