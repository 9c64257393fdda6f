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
#include <filesystem>

#include "json.hpp"
#include "retrolens/corpus/types.hpp"

namespace retrolens::corpus {

struct SynthOptions {
  std::uint64_t seed = 7;
  int minutes = 30;
  int batches = 1;
  // Minutes covered by audio, frames and transcript; -1 means the whole
  // session. Statistics and comments always cover every minute.
  int media_minutes = -1;
  int sample_rate = 16000;
};

inline constexpr EpochSeconds kSynthStartTs = 1704067200;  // 2024-01-01T00:00:00Z

// Builds a deterministic synthetic session in memory. `ground_truth` receives
// the generator's parameters: the linear model behind sales_amount, the noise
// level, per-minute media drivers and the topic of every comment.
SessionCorpus synthesize_session(const SynthOptions& options, nlohmann::json* ground_truth = nullptr);

// Writes the session under `directory` (including ground_truth.json) and
// returns the manifest path.
std::filesystem::path synth_corpus(const SynthOptions& options, const std::filesystem::path& directory);

}  // namespace retrolens::corpus
