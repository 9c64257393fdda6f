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

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace retrolens::service {

enum class JobState { kQueued, kRunning, kDone, kFailed };
std::string_view job_state_name(JobState s);

struct JobStatus {
  JobState state = JobState::kQueued;
  std::string error_code;  // set when failed
  std::string error_message;
};

// Fixed pool of workers draining a FIFO of keyed jobs. Submitting a key that
// is already known is a no-op, which makes submissions idempotent.
class JobQueue {
 public:
  explicit JobQueue(std::size_t workers);
  ~JobQueue();
  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  // Returns false when the key was already submitted.
  bool submit(const std::string& key, std::function<void()> work);
  std::optional<JobStatus> status(const std::string& key) const;
  // Blocks until the job leaves the queued/running states; false if unknown.
  bool wait(const std::string& key) const;
  // Drops a failed job so it can be resubmitted.
  void forget_failed(const std::string& key);

 private:
  void worker();

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::deque<std::pair<std::string, std::function<void()>>> queue_;
  std::map<std::string, JobStatus> jobs_;
  std::vector<std::thread> workers_;
  bool stopping_ = false;
};

}  // namespace retrolens::service
