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
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "retrolens/corpus/synth.hpp"
#include "retrolens/fusion/features.hpp"
#include "retrolens/model/regressors.hpp"

namespace retrolens::testing {

// Fresh empty directory under the system temp dir.
std::filesystem::path fresh_dir(const std::string& label);

// Corpus root holding one synthetic session, generated once per option set
// and reused across test processes. Treat it as read-only.
std::filesystem::path shared_synth_root(const corpus::SynthOptions& options = {});

// Writable copy of a synthetic corpus root.
std::filesystem::path copy_of_synth_root(const corpus::SynthOptions& options, const std::string& label);

// Loaded synthetic session, its first clip and its extracted features (cached
// on disk next to the corpus).
struct SynthFixture {
  std::filesystem::path root;
  std::shared_ptr<const corpus::SessionCorpus> corpus;
  std::shared_ptr<const fusion::SessionFeatures> features;
  std::vector<corpus::Clip> clips;
};
const SynthFixture& synth_fixture(const corpus::SynthOptions& options = {});

std::vector<float> sine(double hz, double amplitude, double seconds, int sample_rate = 16000);
std::vector<float> silence(double seconds, int sample_rate = 16000);
void append(std::vector<float>& to, const std::vector<float>& more);

// Exact Shapley values of v(S) = f(x_S, z_rest) by enumerating all 2^F
// coalitions.
std::vector<double> brute_force_shapley(const std::function<double(std::span<const double>)>& f,
                                        std::span<const double> x, std::span<const double> z);

// Exact Shapley values of the cover-weighted conditional expectation game
// E[f | x_S] of a tree ensemble, again by full enumeration.
std::vector<double> brute_force_conditional_shapley(const model::TreeEnsemble& model, std::span<const double> x);
double conditional_expectation(const model::TreeEnsemble& model, std::span<const double> x,
                               const std::vector<bool>& known);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace retrolens::testing
