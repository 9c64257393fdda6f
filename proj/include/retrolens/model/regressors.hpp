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
#include <memory>
#include <span>
#include <vector>

#include "retrolens/model/metrics.hpp"
#include "retrolens/numeric.hpp"

namespace retrolens::model {

using Matrix = std::vector<std::vector<double>>;  // rows

class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual ModelFamily family() const = 0;
  virtual void fit(const Matrix& x, const std::vector<double>& y, std::uint64_t seed) = 0;
  // Throws UnfittedModel before fit.
  virtual double predict(std::span<const double> x) const = 0;
  virtual bool fitted() const = 0;

  std::vector<double> predict_all(const Matrix& x) const;
};

struct LinearOptions {
  double l2 = 1.0;  // on standardized inputs
};

// Ridge regression on standardized inputs, reported in raw units.
class LinearModel final : public Regressor {
 public:
  explicit LinearModel(LinearOptions options = {}) : options_(options) {}
  ModelFamily family() const override { return ModelFamily::kLinear; }
  void fit(const Matrix& x, const std::vector<double>& y, std::uint64_t seed) override;
  double predict(std::span<const double> x) const override;
  bool fitted() const override { return fitted_; }

  // Builds a fitted model directly from raw-unit coefficients.
  static LinearModel from_coefficients(std::vector<double> weights, double intercept);
  const std::vector<double>& weights() const { return weights_; }
  double intercept() const { return intercept_; }

 private:
  LinearOptions options_;
  std::vector<double> weights_;
  double intercept_ = 0.0;
  bool fitted_ = false;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output
  double cover = 0.0;  // training rows reaching the node
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(std::span<const double> x) const;
  std::size_t depth() const;
};

struct TreeOptions {
  int max_depth = 6;
  std::size_t min_leaf = 1;
  std::size_t features_per_split = 0;  // 0 = all
};

// Greedy variance-reduction CART on the given rows. Candidate features are
// drawn with `rng` when features_per_split is below the feature count.
Tree fit_cart(const Matrix& x, const std::vector<double>& y, const std::vector<std::size_t>& rows,
              const TreeOptions& options, Rng* rng);

// Sum of scaled tree outputs plus an offset:
// f(x) = offset + scale * sum_t tree_t(x).
class TreeEnsemble : public Regressor {
 public:
  double predict(std::span<const double> x) const override;
  bool fitted() const override { return !trees_.empty(); }
  const std::vector<Tree>& trees() const { return trees_; }
  double offset() const { return offset_; }
  double scale() const { return scale_; }

 protected:
  std::vector<Tree> trees_;
  double offset_ = 0.0;
  double scale_ = 1.0;
};

struct ForestOptions {
  std::size_t trees = 100;
  int max_depth = 6;
  std::size_t min_leaf = 1;
};

class RandomForest final : public TreeEnsemble {
 public:
  explicit RandomForest(ForestOptions options = {}) : options_(options) {}
  ModelFamily family() const override { return ModelFamily::kRandomForest; }
  void fit(const Matrix& x, const std::vector<double>& y, std::uint64_t seed) override;

 private:
  ForestOptions options_;
};

struct BoostingOptions {
  std::size_t rounds = 200;
  int max_depth = 3;
  double shrinkage = 0.1;
  std::size_t min_leaf = 1;
};

class GradientBoosting final : public TreeEnsemble {
 public:
  explicit GradientBoosting(BoostingOptions options = {}) : options_(options) {}
  ModelFamily family() const override { return ModelFamily::kGradientBoosting; }
  void fit(const Matrix& x, const std::vector<double>& y, std::uint64_t seed) override;
  // Wraps hand-built trees, for tests and attribution checks.
  static GradientBoosting from_trees(std::vector<Tree> trees, double offset, double scale);

 private:
  BoostingOptions options_;
};

struct PerceptronOptions {
  std::size_t hidden = 32;
  std::size_t epochs = 1500;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double l2 = 1e-4;
};

// One tanh hidden layer trained by full-batch gradient descent with momentum
// on standardized inputs and target.
class Perceptron final : public Regressor {
 public:
  explicit Perceptron(PerceptronOptions options = {}) : options_(options) {}
  ModelFamily family() const override { return ModelFamily::kPerceptron; }
  void fit(const Matrix& x, const std::vector<double>& y, std::uint64_t seed) override;
  double predict(std::span<const double> x) const override;
  bool fitted() const override { return fitted_; }

 private:
  PerceptronOptions options_;
  std::vector<double> in_mean_, in_scale_;  // scale 0 drops a constant column
  double out_mean_ = 0.0, out_scale_ = 0.0;
  std::vector<double> w1_, b1_, w2_;  // w1_: hidden x inputs, row-major
  double b2_ = 0.0;
  bool fitted_ = false;
};

std::unique_ptr<Regressor> make_regressor(ModelFamily family);

}  // namespace retrolens::model
