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

#include "retrolens/frame/features.hpp"

#include <algorithm>

namespace retrolens::frame {
namespace {

const corpus::Face* largest_face(const corpus::FrameAnnotation& frame) {
  const corpus::Face* best = nullptr;
  for (const auto& f : frame.faces)
    if (best == nullptr || f.bbox.area() > best->bbox.area()) best = &f;
  return best;
}

template <std::size_t N>
std::size_t first_max(const std::array<double, N>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

FrameConfig FrameConfig::from_config(const Config& config) {
  FrameConfig c;
  c.closeup_area_frac = config.get_double("frame.closeup_area_frac", c.closeup_area_frac);
  return c;
}

CameraPosition camera_position(const corpus::FrameAnnotation& frame, const FrameConfig& config) {
  const corpus::Face* face = largest_face(frame);
  if (face == nullptr) return CameraPosition::kNoFace;
  const double frac = face->bbox.area() / (static_cast<double>(frame.frame_w) * static_cast<double>(frame.frame_h));
  return frac >= config.closeup_area_frac ? CameraPosition::kCloseUp : CameraPosition::kLongRange;
}

std::optional<Expression> dominant_expression(std::span<const corpus::FrameAnnotation> frames) {
  std::array<double, kExpressionCount> sum{};
  std::size_t n = 0;
  for (const auto& frame : frames) {
    const corpus::Face* face = largest_face(frame);
    if (face == nullptr) continue;
    for (std::size_t k = 0; k < kExpressionCount; ++k) sum[k] += face->expr_probs[k];
    ++n;
  }
  if (n == 0) return std::nullopt;
  // Dividing by n does not change the argmax.
  return static_cast<Expression>(first_max(sum));
}

FrameFeatureSeries per_second_frame_features(const std::vector<corpus::FrameAnnotation>& frames, std::size_t seconds,
                                             const FrameConfig& config) {
  FrameFeatureSeries out;
  out.dominant_expression.assign(seconds, std::nullopt);
  out.camera_position.assign(seconds, CameraPosition::kNoFace);
  std::size_t i = 0;
  for (std::size_t s = 0; s < seconds; ++s) {
    const corpus::SessionMs lo = static_cast<corpus::SessionMs>(s) * 1000, hi = lo + 1000;
    while (i < frames.size() && frames[i].ts_ms < lo) ++i;
    std::size_t j = i;
    while (j < frames.size() && frames[j].ts_ms < hi) ++j;
    if (j == i) continue;
    std::span<const corpus::FrameAnnotation> second(frames.data() + i, j - i);
    out.dominant_expression[s] = dominant_expression(second);
    std::array<double, 3> votes{};
    for (const auto& f : second) votes[static_cast<std::size_t>(camera_position(f, config))] += 1.0;
    out.camera_position[s] = static_cast<CameraPosition>(first_max(votes));
    i = j;
  }
  return out;
}

ExpressionSummary expression_summary(std::span<const std::optional<Expression>> seconds) {
  ExpressionSummary s;
  s.seconds = seconds.size();
  if (seconds.empty()) return s;
  std::array<double, kExpressionCount> counts{};
  std::size_t with_face = 0;
  for (const auto& e : seconds) {
    if (!e) continue;
    counts[static_cast<std::size_t>(*e)] += 1.0;
    ++with_face;
  }
  const double total = static_cast<double>(seconds.size());
  for (std::size_t k = 0; k < kExpressionCount; ++k) s.histogram[k] = counts[k] / total;
  if (with_face == 0) return s;
  const std::size_t mode = first_max(counts);
  s.primary = static_cast<Expression>(mode);
  s.frequency = counts[mode] / total;
  return s;
}

std::int64_t close_up_count(std::span<const CameraPosition> seconds) {
  return std::count(seconds.begin(), seconds.end(), CameraPosition::kCloseUp);
}

}  // namespace retrolens::frame
