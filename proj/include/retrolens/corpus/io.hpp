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

#include <filesystem>
#include <memory>
#include <vector>

#include "retrolens/corpus/types.hpp"

namespace retrolens::corpus {

AudioBuffer read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);

// Loads and validates a session. Accepts either the manifest path or the
// session directory containing `manifest.json`.
std::shared_ptr<const SessionCorpus> load_session(const std::filesystem::path& manifest_path);

// Writes every stream in the on-disk formats, returning the manifest path.
std::filesystem::path save_session(const SessionCorpus& corpus, const std::filesystem::path& directory);

// Stream parsers, exposed for tests and for tools that only need one stream.
SessionManifest parse_manifest(const std::string& json_text, const std::string& origin);
std::vector<StatsRow> parse_stats_csv(const std::string& text, const std::string& origin);
std::vector<TranscriptSentence> parse_transcript(const std::string& text, const std::string& origin);
std::vector<FrameAnnotation> parse_frames(const std::string& text, const std::string& origin);
std::vector<CommentEvent> parse_comments(const std::string& text, const std::string& origin);

std::string format_stats_csv(const std::vector<StatsRow>& rows);
std::string format_manifest(const SessionManifest& manifest);

// One clip per batch: [first launch of the batch, first launch of the next
// batch), the last clip running to session end.
std::vector<Clip> segment_clips(const SessionCorpus& corpus);

std::string make_clip_id(const std::string& session_id, int batch_id);

}  // namespace retrolens::corpus
