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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "retrolens/config.hpp"
#include "retrolens/corpus/types.hpp"

namespace retrolens::frame {

using corpus::Expression;
using corpus::kExpressionCount;

enum class CameraPosition { kLongRange, kCloseUp, kNoFace };
inline constexpr std::array<std::string_view, 3> kCameraPositionNames = {"LongRange", "CloseUp", "NoFace"};
constexpr std::string_view camera_position_name(CameraPosition p) {
  return kCameraPositionNames[static_cast<std::size_t>(p)];
}

struct FrameConfig {
  double closeup_area_frac = 0.08;  // frame.closeup_area_frac
  static FrameConfig from_config(const Config& config);
};

// CloseUp iff the largest face covers at least closeup_area_frac of the frame.
CameraPosition camera_position(const corpus::FrameAnnotation& frame, const FrameConfig& config = {});

// Averages the largest face's expression probabilities over the frames of one
// second. Ties go to the earlier expression in enum order.
std::optional<Expression> dominant_expression(std::span<const corpus::FrameAnnotation> frames);

struct FrameFeatureSeries {
  std::vector<std::optional<Expression>> dominant_expression;
  std::vector<CameraPosition> camera_position;
};

// Groups frames by whole second of session time. A second's camera position
// is the majority over its frames (ties in enum order); seconds without
// frames are NoFace.
FrameFeatureSeries per_second_frame_features(const std::vector<corpus::FrameAnnotation>& frames, std::size_t seconds,
                                             const FrameConfig& config = {});

struct ExpressionSummary {
  std::optional<Expression> primary;
  double frequency = 0.0;                       // share of segment seconds
  std::array<double, kExpressionCount> histogram{};  // fractions of segment seconds
  std::size_t seconds = 0;
};

ExpressionSummary expression_summary(std::span<const std::optional<Expression>> seconds);

std::int64_t close_up_count(std::span<const CameraPosition> seconds);

}  // namespace retrolens::frame
