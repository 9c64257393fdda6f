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

#include "retrolens/service/jobs.hpp"

#include <algorithm>

#include "retrolens/error.hpp"

namespace retrolens::service {

std::string_view job_state_name(JobState s) {
  switch (s) {
    case JobState::kQueued: return "queued";
    case JobState::kRunning: return "running";
    case JobState::kDone: return "done";
    case JobState::kFailed: return "failed";
  }
  return "unknown";
}

JobQueue::JobQueue(std::size_t workers) {
  for (std::size_t i = 0; i < std::max<std::size_t>(workers, 1); ++i) workers_.emplace_back([this] { worker(); });
}

JobQueue::~JobQueue() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& w : workers_) w.join();
}

bool JobQueue::submit(const std::string& key, std::function<void()> work) {
  {
    std::lock_guard lock(mu_);
    if (jobs_.count(key) != 0) return false;
    jobs_[key] = JobStatus{};
    queue_.emplace_back(key, std::move(work));
  }
  cv_.notify_all();
  return true;
}

std::optional<JobStatus> JobQueue::status(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(key);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

bool JobQueue::wait(const std::string& key) const {
  std::unique_lock lock(mu_);
  if (jobs_.count(key) == 0) return false;
  cv_.wait(lock, [&] {
    const auto s = jobs_.at(key).state;
    return s == JobState::kDone || s == JobState::kFailed;
  });
  return true;
}

void JobQueue::forget_failed(const std::string& key) {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(key);
  if (it != jobs_.end() && it->second.state == JobState::kFailed) jobs_.erase(it);
}

void JobQueue::worker() {
  for (;;) {
    std::pair<std::string, std::function<void()>> job;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      job = std::move(queue_.front());
      queue_.pop_front();
      jobs_[job.first].state = JobState::kRunning;
    }
    JobStatus result{JobState::kDone, {}, {}};
    try {
      job.second();
    } catch (const Error& e) {
      result = {JobState::kFailed, std::string(error_code_name(e.code())), e.detail()};
    } catch (const std::exception& e) {
      result = {JobState::kFailed, "InternalError", e.what()};
    }
    {
      std::lock_guard lock(mu_);
      jobs_[job.first] = result;
    }
    cv_.notify_all();
  }
}

}  // namespace retrolens::service
