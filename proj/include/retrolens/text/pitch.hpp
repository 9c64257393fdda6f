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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace retrolens::text {

enum class PitchCategory { kTraffic, kInteraction, kSelling, kOrder, kUrge, kAtmosphere };
inline constexpr std::size_t kCategoryCount = 6;
inline constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "Traffic", "Interaction", "Selling", "Order", "Urge", "Atmosphere"};

constexpr std::string_view category_name(PitchCategory c) { return kCategoryNames[static_cast<std::size_t>(c)]; }
std::optional<PitchCategory> category_from_name(std::string_view name);

constexpr std::size_t index_of(PitchCategory c) { return static_cast<std::size_t>(c); }

struct LabeledSentence {
  std::string text;
  PitchCategory label = PitchCategory::kTraffic;
};

// Lower-cased word tokens. ASCII letters and digits form words; runs of CJK
// ideographs (which carry no spaces) are split into character bigrams, a lone
// ideograph becoming a unigram.
std::vector<std::string> tokenize(std::string_view text);

// Words for counting purposes: whitespace-delimited words, with every CJK
// ideograph counting as one word.
std::size_t word_count(std::string_view text);

// Incomplete transcript fragments (fewer than two tokens) are dropped before
// classification.
bool is_complete_sentence(std::string_view text);

std::vector<LabeledSentence> read_labeled_jsonl(const std::string& text, const std::string& origin);
std::string write_labeled_jsonl(const std::vector<LabeledSentence>& sentences);

}  // namespace retrolens::text
