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

#include <cstdint>
#include <string>
#include <vector>

#include "retrolens/numeric.hpp"
#include "retrolens/text/pitch.hpp"

namespace retrolens::text {

// Templated sales-pitch sentences. Each category has its own phrase
// inventory; a minority of sentences borrow a clause from another category
// and filler words are shared, so the task is not perfectly separable.
std::string sample_pitch_sentence(PitchCategory category, Rng& rng);

// Balanced corpus of `per_category` sentences per class, interleaved by class.
std::vector<LabeledSentence> generate_labeled_corpus(std::uint64_t seed, std::size_t per_category);

// Short viewer comments drawn from one of two topics: 0 = product questions,
// 1 = reactions and chatter.
std::string sample_comment(int topic, Rng& rng);

}  // namespace retrolens::text
