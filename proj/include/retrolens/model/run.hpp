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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "retrolens/fusion/model_matrix.hpp"
#include "retrolens/model/regressors.hpp"
#include "retrolens/model/shapley.hpp"

namespace retrolens::model {

struct FamilyReport {
  ModelFamily family = ModelFamily::kLinear;
  double mae = 0.0;
  std::optional<double> mape;  // fraction
  std::size_t mape_excluded = 0;
  double composite = 0.0;
  std::vector<double> test_predictions;
};

struct ModelRun {
  static constexpr std::string_view kFormat = "retrolens.model_run";
  static constexpr int kVersion = 1;

  std::string run_id;
  std::string clip_id;
  std::string target;
  std::uint64_t seed = 0;
  std::vector<std::string> features;
  std::vector<fusion::Channel> channels;
  std::vector<corpus::EpochSeconds> minute_ts;
  std::vector<double> actual;
  std::vector<bool> media_missing;
  std::vector<bool> lag_missing;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::vector<FamilyReport> reports;  // in family order
  ModelFamily winner = ModelFamily::kLinear;
  bool mae_only = false;  // every test target was zero, MAPE undefined

  // Winner refit on all rows.
  std::vector<double> predictions;
  std::vector<double> background;  // column means over all rows
  double base_value = 0.0;
  Matrix shap;                    // rows x features
  Matrix shap_standard_error;     // sampled attributions only
  std::string shap_method;
  bool additivity_restored = false;
  double max_raw_residual = 0.0;

  nlohmann::json to_json() const;
  static ModelRun from_json(const nlohmann::json& doc);
};

struct ModelingOptions {
  TreeShapMode tree_shap = TreeShapMode::kInterventional;
  std::size_t permutations = 200;
  bool concurrent = true;  // train the four families on separate threads
  std::vector<ModelFamily> families = {ModelFamily::kLinear, ModelFamily::kRandomForest,
                                       ModelFamily::kGradientBoosting, ModelFamily::kPerceptron};
};

inline constexpr std::size_t kMinModelRows = 10;

std::string make_run_id(const std::string& clip_id, const std::string& target, std::uint64_t seed);

// Seed handed to one family, derived from the run seed.
std::uint64_t family_seed(std::uint64_t seed, ModelFamily family);

struct FittedRun {
  ModelRun run;
  std::unique_ptr<Regressor> model;  // the refit winner
};

// Chronological 70/30 split, fits every family, selects the winner and refits
// it on all rows. The returned run has no attributions yet.
FittedRun fit_and_select(const fusion::ModelMatrix& matrix, std::uint64_t seed, const ModelingOptions& options = {});

struct AttributionMatrix {
  double base = 0.0;
  Matrix phi;
  Matrix standard_error;
  std::string method;
  bool additivity_restored = false;
  double max_raw_residual = 0.0;
};

AttributionMatrix shapley_attribution(const Regressor& model, const Matrix& x, const std::vector<double>& background,
                                      std::uint64_t seed, const ModelingOptions& options = {});

// fit_and_select followed by attribution of every row against the column means.
ModelRun run_model(const fusion::ModelMatrix& matrix, std::uint64_t seed, const ModelingOptions& options = {});

}  // namespace retrolens::model
