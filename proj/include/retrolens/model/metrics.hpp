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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace retrolens::model {

enum class ModelFamily { kLinear, kRandomForest, kGradientBoosting, kPerceptron };
inline constexpr std::size_t kFamilyCount = 4;
inline constexpr std::array<std::string_view, kFamilyCount> kFamilyNames = {"linear", "random_forest",
                                                                            "gradient_boosting", "perceptron"};
constexpr std::string_view family_name(ModelFamily f) { return kFamilyNames[static_cast<std::size_t>(f)]; }
std::optional<ModelFamily> family_from_name(std::string_view name);

inline constexpr double kMapeZeroGuard = 1e-9;

double mean_absolute_error(std::span<const double> predicted, std::span<const double> actual);

struct MapeResult {
  std::optional<double> value;  // fraction, not percent; empty when every target is excluded
  std::size_t excluded = 0;     // points with |y| < 1e-9
};
MapeResult mean_absolute_percentage_error(std::span<const double> predicted, std::span<const double> actual);

struct MetricRow {
  double mae = 0.0;
  std::optional<double> mape;
};

struct Selection {
  std::vector<double> composite;
  std::size_t winner = 0;
  bool mae_only = false;  // no family had a defined MAPE
};

// Min-max normalizes MAE and MAPE across the rows (a constant metric
// normalizes to 0) and averages them. The first row with the smallest
// composite wins. When no row has a MAPE the composite is the normalized MAE.
Selection select_winner(std::span<const MetricRow> rows);

}  // namespace retrolens::model
