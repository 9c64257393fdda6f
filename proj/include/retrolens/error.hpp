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

#include <stdexcept>
#include <string>
#include <string_view>

namespace retrolens {

// Machine-readable failure categories. The names double as the `code` field
// of HTTP error payloads, so keep them stable.
enum class ErrorCode {
  kMissingFile,
  kSchemaViolation,
  kUnsortedStream,
  kRatioOutOfRange,
  kIoError,
  kPrecondition,
  kEmptyAudio,
  kCategoryUnderfilled,
  kEmptySentence,
  kClipTooShort,
  kUnknownTarget,
  kTooFewPoints,
  kPerplexityTooLarge,
  kTooFewRows,
  kUnfittedModel,
  kUnmappedFeature,
  kNoShiftInClip,
  kUnknownClip,
  kUnknownSession,
  kUnknownRun,
  kUnknownRecord,
  kValidation,
  kBindFailure,
  kCorpusLoadError,
};

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kUnsortedStream: return "UnsortedStream";
    case ErrorCode::kRatioOutOfRange: return "RatioOutOfRange";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kPrecondition: return "PreconditionFailed";
    case ErrorCode::kEmptyAudio: return "EmptyAudio";
    case ErrorCode::kCategoryUnderfilled: return "CategoryUnderfilled";
    case ErrorCode::kEmptySentence: return "EmptySentence";
    case ErrorCode::kClipTooShort: return "ClipTooShort";
    case ErrorCode::kUnknownTarget: return "UnknownTarget";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kPerplexityTooLarge: return "PerplexityTooLarge";
    case ErrorCode::kTooFewRows: return "TooFewRows";
    case ErrorCode::kUnfittedModel: return "UnfittedModel";
    case ErrorCode::kUnmappedFeature: return "UnmappedFeature";
    case ErrorCode::kNoShiftInClip: return "NoShiftInClip";
    case ErrorCode::kUnknownClip: return "UnknownClip";
    case ErrorCode::kUnknownSession: return "UnknownSession";
    case ErrorCode::kUnknownRun: return "UnknownRun";
    case ErrorCode::kUnknownRecord: return "UnknownRecord";
    case ErrorCode::kValidation: return "ValidationError";
    case ErrorCode::kBindFailure: return "BindFailure";
    case ErrorCode::kCorpusLoadError: return "CorpusLoadError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

// Schema violations carry the offending field and (1-based) line so that a
// corrupted fixture points straight at the bad value.
class SchemaError : public Error {
 public:
  SchemaError(std::string file, std::size_t line, std::string field,
              const std::string& detail, ErrorCode code = ErrorCode::kSchemaViolation)
      : Error(code, file + ":" + std::to_string(line) + ": field '" + field + "': " + detail),
        file_(std::move(file)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string field_;
};

}  // namespace retrolens
