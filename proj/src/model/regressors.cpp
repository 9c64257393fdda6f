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

#include "retrolens/model/regressors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "retrolens/error.hpp"

namespace retrolens::model {
namespace {

void check_training_data(const Matrix& x, const std::vector<double>& y) {
  if (x.empty() || x.size() != y.size()) throw Error(ErrorCode::kPrecondition, "training data needs matching non-empty x and y");
  for (const auto& r : x)
    if (r.size() != x.front().size()) throw Error(ErrorCode::kPrecondition, "ragged training matrix");
}

void column_moments(const Matrix& x, std::vector<double>& mean, std::vector<double>& sd) {
  const std::size_t f = x.front().size();
  const auto n = static_cast<double>(x.size());
  mean.assign(f, 0.0);
  sd.assign(f, 0.0);
  for (const auto& r : x)
    for (std::size_t j = 0; j < f; ++j) mean[j] += r[j];
  for (auto& m : mean) m /= n;
  for (const auto& r : x)
    for (std::size_t j = 0; j < f; ++j) sd[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
  for (auto& s : sd) s = std::sqrt(s / n);
}

[[noreturn]] void throw_unfitted() { throw Error(ErrorCode::kUnfittedModel, "model has not been fitted"); }

}  // namespace

std::vector<double> Regressor::predict_all(const Matrix& x) const {
  std::vector<double> out;
  out.reserve(x.size());
  for (const auto& r : x) out.push_back(predict(r));
  return out;
}

void LinearModel::fit(const Matrix& x, const std::vector<double>& y, std::uint64_t) {
  check_training_data(x, y);
  const std::size_t n = x.size(), f = x.front().size();
  std::vector<double> mean, sd;
  column_moments(x, mean, sd);
  const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f));
  Eigen::VectorXd t(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < f; ++j)
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sd[j] > 0.0 ? (x[i][j] - mean[j]) / sd[j] : 0.0;
    t(static_cast<Eigen::Index>(i)) = y[i] - y_mean;
  }
  Eigen::MatrixXd gram = z.transpose() * z;
  gram.diagonal().array() += options_.l2;
  const Eigen::VectorXd beta = gram.ldlt().solve(z.transpose() * t);
  weights_.assign(f, 0.0);
  intercept_ = y_mean;
  for (std::size_t j = 0; j < f; ++j) {
    if (sd[j] <= 0.0) continue;
    weights_[j] = beta(static_cast<Eigen::Index>(j)) / sd[j];
    intercept_ -= weights_[j] * mean[j];
  }
  fitted_ = true;
}

double LinearModel::predict(std::span<const double> x) const {
  if (!fitted_) throw_unfitted();
  if (x.size() != weights_.size()) throw Error(ErrorCode::kPrecondition, "input width does not match the model");
  double s = intercept_;
  for (std::size_t j = 0; j < x.size(); ++j) s += weights_[j] * x[j];
  return s;
}

LinearModel LinearModel::from_coefficients(std::vector<double> weights, double intercept) {
  LinearModel m;
  m.weights_ = std::move(weights);
  m.intercept_ = intercept;
  m.fitted_ = true;
  return m;
}

double Tree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0)
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left
                                                                                                      : nodes[i].right);
  return nodes[i].value;
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

Tree fit_cart(const Matrix& x, const std::vector<double>& y, const std::vector<std::size_t>& rows,
              const TreeOptions& options, Rng* rng) {
  const std::size_t f = x.front().size();
  Tree tree;
  struct Pending {
    std::size_t node;
    std::vector<std::size_t> rows;
    int depth;
  };
  std::vector<Pending> stack;
  tree.nodes.push_back({});
  stack.push_back({0, rows, 0});
  std::vector<std::size_t> features(f);
  while (!stack.empty()) {
    Pending p = std::move(stack.back());
    stack.pop_back();
    const auto n = static_cast<double>(p.rows.size());
    double sum = 0.0;
    for (auto r : p.rows) sum += y[r];
    TreeNode& node = tree.nodes[p.node];
    node.value = sum / n;
    node.cover = n;
    bool constant = true;
    for (auto r : p.rows) constant = constant && y[r] == y[p.rows.front()];
    if (p.depth >= options.max_depth || p.rows.size() < 2 * options.min_leaf || constant) continue;

    std::iota(features.begin(), features.end(), 0);
    std::size_t k = f;
    if (options.features_per_split > 0 && options.features_per_split < f && rng != nullptr) {
      k = options.features_per_split;
      for (std::size_t i = 0; i < k; ++i) std::swap(features[i], features[i + rng->index(f - i)]);
      std::sort(features.begin(), features.begin() + static_cast<long>(k));
    }
    const double parent = sum * sum / n;
    double best_score = parent;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> sorted = p.rows;
    for (std::size_t fi = 0; fi < k; ++fi) {
      const std::size_t j = features[fi];
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) { return x[a][j] < x[b][j]; });
      double left = 0.0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        left += y[sorted[i]];
        const std::size_t nl = i + 1, nr = sorted.size() - nl;
        if (x[sorted[i]][j] == x[sorted[i + 1]][j] || nl < options.min_leaf || nr < options.min_leaf) continue;
        const double right = sum - left;
        const double score = left * left / static_cast<double>(nl) + right * right / static_cast<double>(nr);
        if (score > best_score + 1e-12 * std::max(1.0, std::abs(parent))) {
          best_score = score;
          best_feature = static_cast<int>(j);
          best_threshold = (x[sorted[i]][j] + x[sorted[i + 1]][j]) / 2.0;
        }
      }
    }
    if (best_feature < 0) continue;
    std::vector<std::size_t> l, r;
    for (auto row : p.rows) (x[row][static_cast<std::size_t>(best_feature)] <= best_threshold ? l : r).push_back(row);
    const auto li = tree.nodes.size();
    tree.nodes.push_back({});
    tree.nodes.push_back({});
    TreeNode& split = tree.nodes[p.node];
    split.feature = best_feature;
    split.threshold = best_threshold;
    split.left = static_cast<int>(li);
    split.right = static_cast<int>(li + 1);
    stack.push_back({li + 1, std::move(r), p.depth + 1});
    stack.push_back({li, std::move(l), p.depth + 1});
  }
  return tree;
}

double TreeEnsemble::predict(std::span<const double> x) const {
  if (trees_.empty()) throw_unfitted();
  double s = 0.0;
  for (const auto& t : trees_) s += t.predict(x);
  return offset_ + scale_ * s;
}

void RandomForest::fit(const Matrix& x, const std::vector<double>& y, std::uint64_t seed) {
  check_training_data(x, y);
  Rng rng(seed);
  const std::size_t n = x.size(), f = x.front().size();
  TreeOptions to{options_.max_depth, options_.min_leaf, std::max<std::size_t>(1, f / 3)};
  trees_.clear();
  for (std::size_t t = 0; t < options_.trees; ++t) {
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = rng.index(n);
    trees_.push_back(fit_cart(x, y, rows, to, &rng));
  }
  offset_ = 0.0;
  scale_ = 1.0 / static_cast<double>(trees_.size());
}

void GradientBoosting::fit(const Matrix& x, const std::vector<double>& y, std::uint64_t) {
  check_training_data(x, y);
  const std::size_t n = x.size();
  offset_ = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  scale_ = 1.0;
  trees_.clear();
  std::vector<double> current(n, offset_), residual(n);
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  const TreeOptions to{options_.max_depth, options_.min_leaf, 0};
  for (std::size_t round = 0; round < options_.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - current[i];
    Tree t = fit_cart(x, residual, rows, to, nullptr);
    for (auto& node : t.nodes) node.value *= options_.shrinkage;
    for (std::size_t i = 0; i < n; ++i) current[i] += t.predict(x[i]);
    trees_.push_back(std::move(t));
  }
}

GradientBoosting GradientBoosting::from_trees(std::vector<Tree> trees, double offset, double scale) {
  GradientBoosting g;
  g.trees_ = std::move(trees);
  g.offset_ = offset;
  g.scale_ = scale;
  return g;
}

void Perceptron::fit(const Matrix& x, const std::vector<double>& y, std::uint64_t seed) {
  check_training_data(x, y);
  const std::size_t n = x.size(), f = x.front().size(), h = options_.hidden;
  std::vector<double> sd;
  column_moments(x, in_mean_, sd);
  in_scale_.assign(f, 0.0);
  for (std::size_t j = 0; j < f; ++j) in_scale_[j] = sd[j] > 0.0 ? 1.0 / sd[j] : 0.0;
  out_mean_ = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : y) var += (v - out_mean_) * (v - out_mean_);
  out_scale_ = std::sqrt(var / static_cast<double>(n));

  Rng rng(seed);
  w1_.resize(h * f);
  b1_.assign(h, 0.0);
  w2_.resize(h);
  b2_ = 0.0;
  for (auto& w : w1_) w = rng.normal() / std::sqrt(static_cast<double>(std::max<std::size_t>(f, 1)));
  for (auto& w : w2_) w = rng.normal() / std::sqrt(static_cast<double>(h));
  fitted_ = true;
  if (out_scale_ <= 0.0) return;  // constant target: the output layer is switched off

  std::vector<double> z(n * f), t(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < f; ++j) z[i * f + j] = (x[i][j] - in_mean_[j]) * in_scale_[j];
    t[i] = (y[i] - out_mean_) / out_scale_;
  }
  std::vector<double> g1(h * f), gb1(h), g2(h), v1(h * f, 0.0), vb1(h, 0.0), v2(h, 0.0), act(h);
  double vb2 = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t epoch = 0; epoch < options_.epochs; ++epoch) {
    std::fill(g1.begin(), g1.end(), 0.0);
    std::fill(gb1.begin(), gb1.end(), 0.0);
    std::fill(g2.begin(), g2.end(), 0.0);
    double gb2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* zi = &z[i * f];
      double out = b2_;
      for (std::size_t u = 0; u < h; ++u) {
        double a = b1_[u];
        for (std::size_t j = 0; j < f; ++j) a += w1_[u * f + j] * zi[j];
        act[u] = std::tanh(a);
        out += w2_[u] * act[u];
      }
      const double err = (out - t[i]) * inv_n;
      gb2 += err;
      for (std::size_t u = 0; u < h; ++u) {
        g2[u] += err * act[u];
        const double back = err * w2_[u] * (1.0 - act[u] * act[u]);
        gb1[u] += back;
        for (std::size_t j = 0; j < f; ++j) g1[u * f + j] += back * zi[j];
      }
    }
    const double lr = options_.learning_rate, mu = options_.momentum, l2 = options_.l2;
    for (std::size_t k = 0; k < w1_.size(); ++k) {
      v1[k] = mu * v1[k] - lr * (g1[k] + l2 * w1_[k]);
      w1_[k] += v1[k];
    }
    for (std::size_t u = 0; u < h; ++u) {
      vb1[u] = mu * vb1[u] - lr * gb1[u];
      b1_[u] += vb1[u];
      v2[u] = mu * v2[u] - lr * (g2[u] + l2 * w2_[u]);
      w2_[u] += v2[u];
    }
    vb2 = mu * vb2 - lr * gb2;
    b2_ += vb2;
  }
}

double Perceptron::predict(std::span<const double> x) const {
  if (!fitted_) throw_unfitted();
  const std::size_t f = in_mean_.size(), h = b1_.size();
  if (x.size() != f) throw Error(ErrorCode::kPrecondition, "input width does not match the model");
  if (out_scale_ <= 0.0) return out_mean_;
  double out = b2_;
  for (std::size_t u = 0; u < h; ++u) {
    double a = b1_[u];
    for (std::size_t j = 0; j < f; ++j) a += w1_[u * f + j] * (x[j] - in_mean_[j]) * in_scale_[j];
    out += w2_[u] * std::tanh(a);
  }
  return out_mean_ + out_scale_ * out;
}

std::unique_ptr<Regressor> make_regressor(ModelFamily family) {
  switch (family) {
    case ModelFamily::kLinear: return std::make_unique<LinearModel>();
    case ModelFamily::kRandomForest: return std::make_unique<RandomForest>();
    case ModelFamily::kGradientBoosting: return std::make_unique<GradientBoosting>();
    case ModelFamily::kPerceptron: return std::make_unique<Perceptron>();
  }
  throw Error(ErrorCode::kPrecondition, "unknown model family");
}

}  // namespace retrolens::model
