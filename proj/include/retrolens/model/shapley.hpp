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
#include <span>
#include <string_view>
#include <vector>

#include "retrolens/model/regressors.hpp"

namespace retrolens::model {

enum class TreeShapMode {
  kInterventional,  // single background reference, exact
  kPathDependent,   // conditional expectations weighted by training cover
};
std::optional<TreeShapMode> tree_shap_mode_from_name(std::string_view name);

struct Attribution {
  std::vector<double> phi;
  double base = 0.0;
  std::vector<double> standard_error;  // sampled methods only
  double raw_residual = 0.0;           // before additivity restoration
};

// phi_f = w_f (x_f - z_f); base = f(z).
Attribution linear_shap(const LinearModel& model, std::span<const double> x, std::span<const double> reference);

// Exact Shapley values of the tree ensemble for the game
// v(S) = f(x_S, z_rest), in time linear in the number of leaves times depth.
Attribution interventional_tree_shap(const TreeEnsemble& model, std::span<const double> x,
                                     std::span<const double> reference);

// Polynomial-time path-dependent tree Shapley values; the game is the
// cover-weighted conditional expectation, base is the expected output.
Attribution path_dependent_tree_shap(const TreeEnsemble& model, std::span<const double> x);

struct SamplingOptions {
  std::size_t permutations = 200;
  std::uint64_t seed = 7;
};

// Monte Carlo permutation Shapley values for v(S) = f(x_S, z_rest). Any
// floating-point residual against f(x) - f(z) is spread over the features in
// proportion to |phi| so the values add up exactly.
Attribution permutation_shap(const Regressor& model, std::span<const double> x, std::span<const double> reference,
                             const SamplingOptions& options);

}  // namespace retrolens::model
