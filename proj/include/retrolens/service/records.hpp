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
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

namespace retrolens::service {

// Saved analyst selections in a JSON-lines append log. Each line is either
// {"op":"create","record":{...}}, {"op":"delete","record_id":"..."} or
// {"op":"meta","next_id":N}. The log is rewritten with only live records once
// deletions outnumber them, keeping the id counter so ids are never reused.
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path path);

  // Assigns record_id and stores the record; returns the stored document.
  nlohmann::json create(nlohmann::json record);
  std::vector<nlohmann::json> list() const;
  // Throws UnknownRecord.
  void remove(const std::string& record_id);
  const std::filesystem::path& path() const { return path_; }
  std::size_t log_lines() const;

 private:
  void append(const nlohmann::json& line);
  void compact_locked();

  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::vector<nlohmann::json> records_;  // creation order
  std::size_t next_id_ = 1;
  std::size_t log_lines_ = 0;
};

}  // namespace retrolens::service
