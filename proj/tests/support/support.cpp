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

#include "support.hpp"

#include "retrolens/corpus/io.hpp"
#include "retrolens/service/engine.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <unistd.h>

#ifndef RETROLENS_TEST_CACHE
#define RETROLENS_TEST_CACHE "/tmp/retrolens-test-cache"
#endif

namespace retrolens::testing {
namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& label) {
  static std::atomic<int> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  auto dir = fs::temp_directory_path() /
             ("retrolens-" + label + "-" + std::to_string(::getpid()) + "-" + std::to_string(stamp) + "-" +
              std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

namespace {
std::string synth_key(const corpus::SynthOptions& o) {
  return "synth-s" + std::to_string(o.seed) + "-m" + std::to_string(o.minutes) + "-b" + std::to_string(o.batches) +
         "-media" + std::to_string(o.media_minutes) + "-sr" + std::to_string(o.sample_rate);
}
}  // namespace

fs::path shared_synth_root(const corpus::SynthOptions& options) {
  const fs::path root = fs::path(RETROLENS_TEST_CACHE) / synth_key(options);
  if (fs::exists(root / ".complete")) return root;
  fs::create_directories(root.parent_path());
  const auto staging = root.string() + ".staging-" + std::to_string(::getpid());
  fs::remove_all(staging);
  corpus::synth_corpus(options, fs::path(staging) / ("synth-" + std::to_string(options.seed)));
  write_file(fs::path(staging) / ".complete", "");
  std::error_code ec;
  fs::rename(staging, root, ec);
  // Another process won the race; its copy is identical.
  if (ec) fs::remove_all(staging);
  return root;
}

fs::path copy_of_synth_root(const corpus::SynthOptions& options, const std::string& label) {
  const auto src = shared_synth_root(options);
  const auto dst = fresh_dir(label);
  const auto session = "synth-" + std::to_string(options.seed);
  fs::copy(src / session, dst / session, fs::copy_options::recursive);
  return dst;
}

const SynthFixture& synth_fixture(const corpus::SynthOptions& options) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<SynthFixture>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[synth_key(options)];
  if (!slot) {
    auto f = std::make_unique<SynthFixture>();
    f->root = shared_synth_root(options);
    service::Engine engine({f->root, Config{}, false});
    const auto sid = "synth-" + std::to_string(options.seed);
    f->corpus = engine.session(sid);
    f->features = engine.features(sid).features;
    f->clips = corpus::segment_clips(*f->corpus);
    slot = std::move(f);
  }
  return *slot;
}

std::vector<float> sine(double hz, double amplitude, double seconds, int sample_rate) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<float>(amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / sample_rate));
  return out;
}

std::vector<float> silence(double seconds, int sample_rate) {
  return std::vector<float>(static_cast<std::size_t>(std::llround(seconds * sample_rate)), 0.0f);
}

void append(std::vector<float>& to, const std::vector<float>& more) { to.insert(to.end(), more.begin(), more.end()); }

namespace {
double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
  return f;
}

template <typename Game>
std::vector<double> enumerate(std::size_t f_count, const Game& value) {
  const std::size_t subsets = std::size_t{1} << f_count;
  std::vector<double> v(subsets);
  for (std::size_t mask = 0; mask < subsets; ++mask) v[mask] = value(mask);
  std::vector<double> phi(f_count, 0.0);
  const double nf = factorial(f_count);
  for (std::size_t i = 0; i < f_count; ++i)
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      if (mask & (std::size_t{1} << i)) continue;
      const auto s = static_cast<std::size_t>(__builtin_popcountll(mask));
      const double w = factorial(s) * factorial(f_count - s - 1) / nf;
      phi[i] += w * (v[mask | (std::size_t{1} << i)] - v[mask]);
    }
  return phi;
}
}  // namespace

std::vector<double> brute_force_shapley(const std::function<double(std::span<const double>)>& f,
                                        std::span<const double> x, std::span<const double> z) {
  const std::size_t n = x.size();
  std::vector<double> point(n);
  return enumerate(n, [&](std::size_t mask) {
    for (std::size_t j = 0; j < n; ++j) point[j] = (mask & (std::size_t{1} << j)) ? x[j] : z[j];
    return f(point);
  });
}

namespace {
double tree_expectation(const model::Tree& tree, int node, std::span<const double> x, const std::vector<bool>& known) {
  const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
  if (nd.feature < 0) return nd.value;
  const auto f = static_cast<std::size_t>(nd.feature);
  if (known[f]) return tree_expectation(tree, x[f] <= nd.threshold ? nd.left : nd.right, x, known);
  const auto& l = tree.nodes[static_cast<std::size_t>(nd.left)];
  const auto& r = tree.nodes[static_cast<std::size_t>(nd.right)];
  return (l.cover * tree_expectation(tree, nd.left, x, known) + r.cover * tree_expectation(tree, nd.right, x, known)) /
         (l.cover + r.cover);
}
}  // namespace

double conditional_expectation(const model::TreeEnsemble& model, std::span<const double> x,
                               const std::vector<bool>& known) {
  double s = 0.0;
  for (const auto& t : model.trees()) s += tree_expectation(t, 0, x, known);
  return model.offset() + model.scale() * s;
}

std::vector<double> brute_force_conditional_shapley(const model::TreeEnsemble& model, std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<bool> known(n);
  return enumerate(n, [&](std::size_t mask) {
    for (std::size_t j = 0; j < n; ++j) known[j] = (mask & (std::size_t{1} << j)) != 0;
    return conditional_expectation(model, x, known);
  });
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace retrolens::testing
