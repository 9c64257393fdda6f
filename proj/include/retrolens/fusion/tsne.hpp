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
#include <vector>

#include "retrolens/config.hpp"

namespace retrolens::fusion {

struct TsneOptions {
  int out_dim = 2;
  double perplexity = 10.0;  // tsne.perplexity
  int iterations = 1000;     // tsne.iters
  std::uint64_t seed = 7;
  // Step size; 0 selects N / exaggeration, which scales with the affinity
  // magnitudes and stays stable for the small N of a clip.
  double learning_rate = 0.0;
  int exaggeration_iterations = 250;
  double exaggeration = 12.0;
  int momentum_switch = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  double perplexity_tolerance = 1e-4;  // in bits

  static TsneOptions from_config(const Config& config);
};

struct ProjectionResult {
  std::vector<std::vector<double>> coordinates;  // N x out_dim
  std::uint64_t seed = 0;
  double perplexity = 0.0;
  double initial_kl = 0.0;  // random start, unexaggerated affinities
  double final_kl = 0.0;
  int iterations = 0;
  // Largest |log2 perplexity - target| over points after bandwidth search.
  double max_perplexity_error = 0.0;
};

// Exact t-SNE. Points are processed in a canonical (sorted) order and each
// starting position is drawn from a hash of the point's content and the seed,
// so permuting the input permutes the output rows and identical points stay
// together.
ProjectionResult tsne(const std::vector<std::vector<double>>& points, const TsneOptions& options);

// Largest perplexity accepted for n points (exclusive bound).
inline double max_perplexity(std::size_t n) { return (static_cast<double>(n) - 1.0) / 3.0; }

// Gaussian row affinities p_{j|i} for one point given squared distances,
// matched to the target perplexity by bisection on the precision. Returns
// the achieved log2 perplexity. Exposed for tests.
double calibrate_row(const std::vector<double>& sq_dist, std::size_t self, double perplexity, double tolerance,
                     std::vector<double>& row);

}  // namespace retrolens::fusion
