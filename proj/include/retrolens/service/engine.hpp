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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "retrolens/config.hpp"
#include "retrolens/corpus/types.hpp"
#include "retrolens/fusion/comments.hpp"
#include "retrolens/fusion/features.hpp"
#include "retrolens/model/run.hpp"
#include "retrolens/model/summaries.hpp"
#include "retrolens/service/jobs.hpp"
#include "retrolens/service/records.hpp"
#include "retrolens/text/classifier.hpp"

namespace retrolens::service {

inline constexpr int kApiVersion = 1;

struct EngineOptions {
  std::filesystem::path corpus_root;
  Config config;
  bool eager = true;  // load and validate every session up front
};

// Resolves the corpus root from an explicit value, then RETROLENS_CORPUS.
std::optional<std::filesystem::path> resolve_corpus_root(const std::string& explicit_root);

// Everything the HTTP routes and the offline report need; every JSON view is
// produced here so both paths return identical documents. Thread-safe.
class Engine {
 public:
  explicit Engine(EngineOptions options);
  ~Engine();

  const Config& config() const { return options_.config; }
  const std::filesystem::path& cache_dir() const { return cache_dir_; }

  std::vector<std::string> session_ids() const;
  std::shared_ptr<const corpus::SessionCorpus> session(const std::string& session_id) const;

  struct ClipRef {
    std::shared_ptr<const corpus::SessionCorpus> corpus;
    corpus::Clip clip;
  };
  ClipRef clip(const std::string& clip_id) const;

  const text::PitchClassifier& classifier() const;

  struct FeatureResult {
    std::shared_ptr<const fusion::SessionFeatures> features;
    bool cache_hit = false;
    std::filesystem::path path;
  };
  FeatureResult features(const std::string& session_id) const;

  // Computes (or loads) the run synchronously.
  std::shared_ptr<const model::ModelRun> run(const std::string& clip_id, const std::string& target,
                                             std::uint64_t seed) const;
  nlohmann::json submit_run(const std::string& clip_id, const std::string& target, std::uint64_t seed);
  nlohmann::json run_json(const std::string& run_id) const;
  nlohmann::json attributions_json(const std::string& run_id, const std::string& level, int granularity,
                                   const std::string& channel) const;

  nlohmann::json sessions_json() const;
  nlohmann::json session_json(const std::string& session_id) const;
  nlohmann::json session_clips_json(const std::string& session_id) const;
  nlohmann::json clip_segments_json(const std::string& clip_id, int granularity) const;
  nlohmann::json clip_features_json(const std::string& clip_id, const std::string& channel) const;
  nlohmann::json comments_summary_json(const std::string& clip_id, int granularity) const;
  nlohmann::json projection_json(const std::string& clip_id, int granularity, std::uint64_t seed) const;

  nlohmann::json create_record(const nlohmann::json& payload);
  nlohmann::json records_json() const;
  void delete_record(const std::string& record_id);
  nlohmann::json export_records_json() const;

  // One document holding every GET view of the clip and the runs for all
  // nine targets.
  nlohmann::json report_json(const std::string& clip_id, std::uint64_t seed) const;

  std::uint64_t default_seed() const { return default_seed_; }

 private:
  std::shared_ptr<const model::ModelRun> find_run(const std::string& run_id) const;
  std::uint64_t run_fingerprint(const std::string& session_id) const;
  std::uint64_t feature_key(const corpus::SessionCorpus& corpus) const;

  EngineOptions options_;
  std::filesystem::path cache_dir_;
  std::map<std::string, std::filesystem::path> session_dirs_;
  fusion::FeatureConfig feature_config_;
  fusion::TsneOptions tsne_options_;
  model::ModelingOptions modeling_options_;
  model::RadarOptions radar_options_;
  bool lag_target_ = true;
  std::size_t keyword_count_ = 5;
  std::uint64_t default_seed_ = 7;

  mutable std::mutex mu_;
  mutable std::map<std::string, std::shared_ptr<const corpus::SessionCorpus>> sessions_;
  mutable std::map<std::string, std::shared_ptr<const fusion::SessionFeatures>> features_;
  mutable std::map<std::string, std::shared_ptr<const model::ModelRun>> runs_;
  mutable std::map<std::string, std::tuple<std::string, std::string, std::uint64_t>> run_requests_;
  mutable std::once_flag classifier_once_;
  mutable std::unique_ptr<text::PitchClassifier> classifier_;
  mutable std::uint64_t classifier_hash_ = 0;
  std::unique_ptr<RecordStore> records_;
  std::unique_ptr<JobQueue> jobs_;
};

}  // namespace retrolens::service
