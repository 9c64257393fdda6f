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

#include "retrolens/service/records.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "retrolens/error.hpp"

namespace retrolens::service {

using nlohmann::json;

namespace {

std::size_t id_number(const std::string& id) {
  if (id.rfind("rec-", 0) != 0) return 0;
  try {
    return std::stoul(id.substr(4));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

RecordStore::RecordStore(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ifstream in(path_);
  std::string line;
  std::size_t lineno = 0, deletes = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaViolation, path_.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    ++log_lines_;
    const auto op = doc.value("op", std::string());
    if (op == "create" && doc.contains("record")) {
      const auto& rec = doc["record"];
      next_id_ = std::max(next_id_, id_number(rec.value("record_id", std::string())) + 1);
      records_.push_back(rec);
    } else if (op == "meta") {
      next_id_ = std::max(next_id_, doc.value("next_id", std::size_t{1}));
    } else if (op == "delete") {
      const auto id = doc.value("record_id", std::string());
      std::erase_if(records_, [&](const json& r) { return r.value("record_id", std::string()) == id; });
      ++deletes;
    } else {
      throw Error(ErrorCode::kSchemaViolation, path_.string() + ":" + std::to_string(lineno) + ": unknown record op");
    }
  }
  if (deletes > 0) {
    std::lock_guard lock(mu_);
    compact_locked();
  }
}

void RecordStore::append(const json& line) {
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot append to " + path_.string());
  out << line.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "write failed on " + path_.string());
  ++log_lines_;
}

void RecordStore::compact_locked() {
  const auto tmp = path_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp);
    out << json{{"op", "meta"}, {"next_id", next_id_}}.dump() << '\n';
    for (const auto& r : records_) out << json{{"op", "create"}, {"record", r}}.dump() << '\n';
    if (!out) throw Error(ErrorCode::kIoError, "write failed on " + tmp);
  }
  std::filesystem::rename(tmp, path_);
  log_lines_ = records_.size() + 1;
}

json RecordStore::create(json record) {
  std::lock_guard lock(mu_);
  char id[32];
  std::snprintf(id, sizeof id, "rec-%06zu", next_id_);
  record["record_id"] = id;
  append({{"op", "create"}, {"record", record}});
  ++next_id_;
  records_.push_back(record);
  return record;
}

std::vector<json> RecordStore::list() const {
  std::lock_guard lock(mu_);
  return records_;
}

void RecordStore::remove(const std::string& record_id) {
  std::lock_guard lock(mu_);
  auto it = std::find_if(records_.begin(), records_.end(),
                         [&](const json& r) { return r.value("record_id", std::string()) == record_id; });
  if (it == records_.end()) throw Error(ErrorCode::kUnknownRecord, "no record '" + record_id + "'");
  append({{"op", "delete"}, {"record_id", record_id}});
  records_.erase(it);
  if (log_lines_ > 2 * records_.size() + 8) compact_locked();
}

std::size_t RecordStore::log_lines() const {
  std::lock_guard lock(mu_);
  return log_lines_;
}

}  // namespace retrolens::service
