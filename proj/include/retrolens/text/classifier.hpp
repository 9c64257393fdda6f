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
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "retrolens/text/pitch.hpp"

namespace retrolens::text {

struct ClassifyResult {
  PitchCategory category = PitchCategory::kTraffic;
  std::array<double, kCategoryCount> probabilities{};
};

// Anything that labels a sentence with a sales-pitch category. The bundled
// implementation is the linear bag-of-terms model below; a heavier model can
// be slotted in behind the same interface.
class PitchClassifierProvider {
 public:
  virtual ~PitchClassifierProvider() = default;
  virtual ClassifyResult classify(std::string_view sentence) const = 0;
  virtual std::string name() const = 0;
};

struct TrainingOptions {
  std::uint64_t seed = 7;
  std::size_t folds = 5;
  std::vector<double> l2_grid = {1e-4, 1e-3, 1e-2, 1e-1};
  std::size_t iterations = 400;
  double learning_rate = 1.0;
  double momentum = 0.9;
  std::size_t min_per_category = 10;
};

struct CvReport {
  std::uint64_t seed = 0;
  std::vector<double> l2_grid;
  std::vector<double> grid_mean_accuracy;
  double chosen_l2 = 0.0;
  std::vector<double> fold_accuracy;  // at the chosen strength
  double mean_accuracy = 0.0;

  friend bool operator==(const CvReport&, const CvReport&) = default;
};

// Fold index for every sentence: classes are shuffled independently with the
// seed and dealt round-robin, so each fold holds a near-equal share of every
// category.
std::vector<std::size_t> stratified_folds(const std::vector<PitchCategory>& labels, std::size_t folds,
                                          std::uint64_t seed);

class PitchClassifier final : public PitchClassifierProvider {
 public:
  static constexpr std::string_view kFormat = "retrolens.pitch_classifier";
  static constexpr int kVersion = 1;

  PitchClassifier() = default;

  // Cross-validates the regularization strength, then refits on everything.
  static PitchClassifier train(const std::vector<LabeledSentence>& corpus, const TrainingOptions& options = {});

  // Fits a single model with a fixed strength (no cross-validation).
  static PitchClassifier fit(const std::vector<LabeledSentence>& corpus, double l2, const TrainingOptions& options);

  ClassifyResult classify(std::string_view sentence) const override;
  std::string name() const override { return "tfidf-logistic"; }

  const CvReport& report() const { return report_; }
  std::size_t vocabulary_size() const { return vocabulary_.size(); }

  nlohmann::json to_json() const;
  static PitchClassifier from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static PitchClassifier load(const std::filesystem::path& path);

  friend bool operator==(const PitchClassifier& a, const PitchClassifier& b) {
    return a.vocabulary_ == b.vocabulary_ && a.idf_ == b.idf_ && a.weights_ == b.weights_ && a.bias_ == b.bias_ &&
           a.l2_ == b.l2_ && a.report_ == b.report_;
  }

 private:
  using SparseRow = std::vector<std::pair<std::size_t, double>>;
  SparseRow featurize(std::string_view sentence) const;
  void rebuild_index();

  std::vector<std::string> vocabulary_;  // sorted
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<double> idf_;
  std::vector<double> weights_;  // kCategoryCount x vocabulary, row-major
  std::array<double, kCategoryCount> bias_{};
  double l2_ = 0.0;
  CvReport report_;
};

}  // namespace retrolens::text
