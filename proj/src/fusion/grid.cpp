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

#include "retrolens/fusion/grid.hpp"

#include <algorithm>

#include "retrolens/error.hpp"

namespace retrolens::fusion {

SegmentGrid build_grid(const corpus::Clip& clip, int granularity) {
  if (granularity != 1 && granularity != 5)
    throw Error(ErrorCode::kPrecondition, "granularity must be 1 or 5 minutes, got " + std::to_string(granularity));
  if (clip.span.duration() <= 0) throw Error(ErrorCode::kClipTooShort, "clip " + clip.clip_id + " has no duration");
  SegmentGrid grid{clip.clip_id, granularity, {}};
  const corpus::EpochSeconds step = static_cast<corpus::EpochSeconds>(granularity) * 60;
  for (auto t = clip.span.start; t < clip.span.end; t += step)
    grid.segments.push_back({t, std::min(t + step, clip.span.end)});
  return grid;
}

}  // namespace retrolens::fusion
