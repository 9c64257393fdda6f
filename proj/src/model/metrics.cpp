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

#include "retrolens/model/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "retrolens/error.hpp"

namespace retrolens::model {

std::optional<ModelFamily> family_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFamilyCount; ++i)
    if (kFamilyNames[i] == name) return static_cast<ModelFamily>(i);
  return std::nullopt;
}

double mean_absolute_error(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size() || actual.empty())
    throw Error(ErrorCode::kPrecondition, "MAE needs equal-length, non-empty series");
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) s += std::abs(predicted[i] - actual[i]);
  return s / static_cast<double>(actual.size());
}

MapeResult mean_absolute_percentage_error(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw Error(ErrorCode::kPrecondition, "MAPE needs equal-length series");
  MapeResult r;
  double s = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (std::abs(actual[i]) < kMapeZeroGuard) {
      ++r.excluded;
      continue;
    }
    s += std::abs(predicted[i] - actual[i]) / std::abs(actual[i]);
    ++used;
  }
  if (used > 0) r.value = s / static_cast<double>(used);
  return r;
}

Selection select_winner(std::span<const MetricRow> rows) {
  if (rows.empty()) throw Error(ErrorCode::kPrecondition, "no models to select from");
  auto normalize = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    std::vector<double> out(v.size(), 0.0);
    if (*hi > *lo)
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / (*hi - *lo);
    return out;
  };
  std::vector<double> mae, mape;
  bool all_mape = true, any_mape = false;
  for (const auto& r : rows) {
    mae.push_back(r.mae);
    all_mape = all_mape && r.mape.has_value();
    any_mape = any_mape || r.mape.has_value();
    mape.push_back(r.mape.value_or(0.0));
  }
  if (any_mape && !all_mape) throw Error(ErrorCode::kPrecondition, "MAPE must be defined for all models or none");
  Selection s;
  s.mae_only = !any_mape;
  const auto nmae = normalize(mae);
  const auto nmape = normalize(mape);
  for (std::size_t i = 0; i < rows.size(); ++i) s.composite.push_back(s.mae_only ? nmae[i] : (nmae[i] + nmape[i]) / 2.0);
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (s.composite[i] < s.composite[s.winner]) s.winner = i;
  return s;
}

}  // namespace retrolens::model
