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

#include <gtest/gtest.h>

#include "retrolens/frame/features.hpp"
#include "retrolens/numeric.hpp"

using namespace retrolens;
using namespace retrolens::frame;
using corpus::Expression;
using corpus::Face;
using corpus::FrameAnnotation;

namespace {

std::array<double, kExpressionCount> probs_with(Expression e, double p) {
  std::array<double, kExpressionCount> a{};
  const double rest = (1.0 - p) / (kExpressionCount - 1);
  for (auto& v : a) v = rest;
  a[static_cast<std::size_t>(e)] = p;
  return a;
}

FrameAnnotation frame_with_face(double side, int w = 1920, int h = 1080,
                                std::array<double, kExpressionCount> probs = probs_with(Expression::kNeutral, 0.9),
                                corpus::SessionMs ts = 0) {
  return {ts, w, h, {Face{{10, 10, side, side}, probs}}};
}

}  // namespace

TEST(CameraPosition, NoFacesIsNoFace) {
  EXPECT_EQ(camera_position(FrameAnnotation{0, 1920, 1080, {}}), CameraPosition::kNoFace);
}

TEST(CameraPosition, ThresholdAtEightPercentOfFrame) {
  // 400x400 / (1920x1080) = 7.7%, 500x500 = 12.1%.
  EXPECT_NEAR(400.0 * 400.0 / (1920.0 * 1080.0), 0.0772, 1e-4);
  EXPECT_EQ(camera_position(frame_with_face(400)), CameraPosition::kLongRange);
  EXPECT_EQ(camera_position(frame_with_face(500)), CameraPosition::kCloseUp);
  // Right at the boundary counts as close-up.
  const double side = std::sqrt(0.08 * 1000 * 1000);
  EXPECT_EQ(camera_position(frame_with_face(side, 1000, 1000)), CameraPosition::kCloseUp);
}

TEST(CameraPosition, LargestFaceDecides) {
  FrameAnnotation f = frame_with_face(100);
  f.faces.push_back(Face{{600, 100, 520, 520}, probs_with(Expression::kHappy, 0.9)});
  EXPECT_EQ(camera_position(f), CameraPosition::kCloseUp);
}

TEST(CameraPosition, InvariantToUniformScaling) {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const double side = rng.uniform(50, 600);
    const auto base = camera_position(frame_with_face(side, 1280, 720));
    for (double k : {0.5, 1.5, 3.0}) {
      FrameAnnotation f = frame_with_face(side * k, static_cast<int>(1280 * k), static_cast<int>(720 * k));
      EXPECT_EQ(camera_position(f), base) << side << " x" << k;
    }
  }
}

TEST(CameraPosition, ThresholdIsConfigurable) {
  FrameConfig c = FrameConfig::from_config(Config::parse("frame.closeup_area_frac = 0.05\n"));
  EXPECT_EQ(c.closeup_area_frac, 0.05);
  EXPECT_EQ(camera_position(frame_with_face(400), c), CameraPosition::kCloseUp);
}

TEST(DominantExpression, AllHappyFramesGiveHappy) {
  std::vector<FrameAnnotation> f;
  for (int i = 0; i < 3; ++i) f.push_back(frame_with_face(300, 1920, 1080, probs_with(Expression::kHappy, 0.9), i * 300));
  EXPECT_EQ(dominant_expression(f), Expression::kHappy);
}

TEST(DominantExpression, NoFacesGiveNone) {
  std::vector<FrameAnnotation> f = {{0, 1920, 1080, {}}, {500, 1920, 1080, {}}};
  EXPECT_FALSE(dominant_expression(f).has_value());
  EXPECT_FALSE(dominant_expression({}).has_value());
}

TEST(DominantExpression, ExactTieGoesToEarlierEnumValue) {
  std::array<double, kExpressionCount> p{};
  p[static_cast<std::size_t>(Expression::kHappy)] = 0.5;
  p[static_cast<std::size_t>(Expression::kSad)] = 0.5;
  std::vector<FrameAnnotation> f = {frame_with_face(300, 1920, 1080, p)};
  EXPECT_EQ(dominant_expression(f), Expression::kHappy);
}

TEST(DominantExpression, AveragesAcrossFramesUsingLargestFace) {
  auto a = frame_with_face(300, 1920, 1080, probs_with(Expression::kSurprise, 0.6), 0);
  a.faces.push_back(Face{{900, 10, 50, 50}, probs_with(Expression::kAngry, 1.0)});  // small face ignored
  auto b = frame_with_face(300, 1920, 1080, probs_with(Expression::kFear, 0.5), 500);
  std::vector<FrameAnnotation> f = {a, b};
  EXPECT_EQ(dominant_expression(f), Expression::kSurprise);
}

TEST(ExpressionSummary, SixtyNeutralSeconds) {
  std::vector<std::optional<Expression>> s(60, Expression::kNeutral);
  const auto r = expression_summary(s);
  EXPECT_EQ(r.primary, Expression::kNeutral);
  EXPECT_DOUBLE_EQ(r.frequency, 1.0);
}

TEST(ExpressionSummary, FrequencyIsOverAllSegmentSeconds) {
  std::vector<std::optional<Expression>> s(30, Expression::kHappy);
  s.resize(60, std::nullopt);
  const auto r = expression_summary(s);
  EXPECT_EQ(r.primary, Expression::kHappy);
  EXPECT_DOUBLE_EQ(r.frequency, 0.5);
}

TEST(ExpressionSummary, EmptySegment) {
  const auto r = expression_summary({});
  EXPECT_FALSE(r.primary.has_value());
  EXPECT_EQ(r.frequency, 0.0);
}

TEST(ExpressionSummary, HistogramPlusNoFaceIsOne) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::optional<Expression>> s(1 + rng.index(300));
    std::size_t none = 0;
    for (auto& v : s) {
      if (rng.uniform() < 0.3) {
        ++none;
      } else {
        v = static_cast<Expression>(rng.index(kExpressionCount));
      }
    }
    const auto r = expression_summary(s);
    double total = 0.0;
    for (double h : r.histogram) {
      EXPECT_GE(h, 0.0);
      total += h;
    }
    EXPECT_LE(total, 1.0 + 1e-12);
    EXPECT_NEAR(total + static_cast<double>(none) / static_cast<double>(s.size()), 1.0, 1e-9);
  }
}

TEST(PerSecondFrames, GroupsByWholeSecondAndFillsGaps) {
  std::vector<FrameAnnotation> f = {frame_with_face(500, 1920, 1080, probs_with(Expression::kHappy, 0.9), 0),
                                    frame_with_face(500, 1920, 1080, probs_with(Expression::kHappy, 0.9), 500),
                                    frame_with_face(100, 1920, 1080, probs_with(Expression::kSad, 0.9), 2000)};
  const auto s = per_second_frame_features(f, 4);
  ASSERT_EQ(s.camera_position.size(), 4u);
  EXPECT_EQ(s.camera_position[0], CameraPosition::kCloseUp);
  EXPECT_EQ(s.camera_position[1], CameraPosition::kNoFace);
  EXPECT_EQ(s.camera_position[2], CameraPosition::kLongRange);
  EXPECT_EQ(s.camera_position[3], CameraPosition::kNoFace);
  EXPECT_EQ(s.dominant_expression[0], Expression::kHappy);
  EXPECT_FALSE(s.dominant_expression[1]);
  EXPECT_EQ(s.dominant_expression[2], Expression::kSad);
}

TEST(CloseUpCount, FiveMinuteCountIsSumOfMinuteCounts) {
  Rng rng(21);
  std::vector<CameraPosition> s(300);
  for (auto& p : s) p = static_cast<CameraPosition>(rng.index(3));
  std::int64_t folded = 0;
  for (int m = 0; m < 5; ++m) folded += close_up_count(std::span<const CameraPosition>(s).subspan(60 * m, 60));
  EXPECT_EQ(close_up_count(s), folded);
}
