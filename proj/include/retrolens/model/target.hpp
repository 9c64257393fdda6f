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
#include <string_view>

#include "retrolens/corpus/types.hpp"
#include "retrolens/error.hpp"

namespace retrolens::model {

// The nine quantities an analyst can choose to predict.
enum class TargetOption {
  kSalesAmount,
  kSalesVolume,
  kUvValue,
  kGpm,
  kEntries,
  kDepartures,
  kLikes,
  kComments,
  kAvgStay,
};
inline constexpr std::size_t kTargetCount = 9;
inline constexpr std::array<std::string_view, kTargetCount> kTargetNames = {
    "sales_amount", "sales_volume", "uv_value", "gpm", "entries", "departures", "likes", "comments", "avg_stay"};

constexpr std::string_view target_name(TargetOption t) { return kTargetNames[static_cast<std::size_t>(t)]; }

inline std::optional<TargetOption> target_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kTargetCount; ++i)
    if (kTargetNames[i] == name) return static_cast<TargetOption>(i);
  return std::nullopt;
}

inline TargetOption parse_target(std::string_view name) {
  auto t = target_from_name(name);
  if (!t) throw Error(ErrorCode::kUnknownTarget, "unknown target '" + std::string(name) + "'");
  return *t;
}

constexpr corpus::Metric target_metric(TargetOption t) {
  using corpus::Metric;
  constexpr std::array<Metric, kTargetCount> kMap = {
      Metric::kSalesAmount, Metric::kSalesVolume, Metric::kUvValue, Metric::kGpm,          Metric::kEntries,
      Metric::kDepartures,  Metric::kLikes,       Metric::kComments, Metric::kAvgStaySeconds};
  return kMap[static_cast<std::size_t>(t)];
}

}  // namespace retrolens::model
