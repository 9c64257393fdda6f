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

#include <string>
#include <vector>

#include "retrolens/corpus/types.hpp"

namespace retrolens::fusion {

struct SegmentGrid {
  std::string clip_id;
  int granularity = 1;  // minutes
  std::vector<corpus::TimeSpan> segments;
  friend bool operator==(const SegmentGrid&, const SegmentGrid&) = default;
};

// Splits the clip into consecutive granularity-minute segments; the last one
// may be short.
SegmentGrid build_grid(const corpus::Clip& clip, int granularity);

}  // namespace retrolens::fusion
