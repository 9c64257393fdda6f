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

#include "retrolens/model/shapley.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "retrolens/error.hpp"
#include "retrolens/numeric.hpp"

namespace retrolens::model {
namespace {

void require_fitted(const Regressor& m) {
  if (!m.fitted()) throw Error(ErrorCode::kUnfittedModel, "attribution needs a fitted model");
}

// w(a, b) = a! b! / (a + b + 1)!, the Shapley weight of a coalition path.
// Computed as a product to avoid factorial overflow.
double path_weight(std::size_t a, std::size_t b) {
  double w = 1.0 / static_cast<double>(a + b + 1);
  // a! b! / (a+b)! = 1 / C(a+b, a)
  for (std::size_t k = 1; k <= std::min(a, b); ++k)
    w *= static_cast<double>(k) / static_cast<double>(std::max(a, b) + k);
  return w;
}

struct InterventionalWalk {
  const Tree& tree;
  std::span<const double> x, z;
  std::vector<double>& phi;
  double scale;
  std::vector<int> state;  // per feature: 0 unseen, 1 follows x, 2 follows z
  std::vector<std::size_t> x_only, z_only;

  void visit(std::size_t node) {
    const TreeNode& n = tree.nodes[node];
    if (n.feature < 0) {
      const std::size_t a = x_only.size(), b = z_only.size();
      const double v = scale * n.value;
      // Leaf reached with x-side features A and z-side features B: i in A
      // gains v (a-1)! b! / (a+b)!, i in B loses v a! (b-1)! / (a+b)!.
      if (a > 0) {
        const double w = v * path_weight(a - 1, b);
        for (auto i : x_only) phi[i] += w;
      }
      if (b > 0) {
        const double w = v * path_weight(a, b - 1);
        for (auto i : z_only) phi[i] -= w;
      }
      return;
    }
    const auto f = static_cast<std::size_t>(n.feature);
    const auto x_child = static_cast<std::size_t>(x[f] <= n.threshold ? n.left : n.right);
    const auto z_child = static_cast<std::size_t>(z[f] <= n.threshold ? n.left : n.right);
    if (x_child == z_child) return visit(x_child);
    if (state[f] == 1) return visit(x_child);
    if (state[f] == 2) return visit(z_child);
    state[f] = 1;
    x_only.push_back(f);
    visit(x_child);
    x_only.pop_back();
    state[f] = 2;
    z_only.push_back(f);
    visit(z_child);
    z_only.pop_back();
    state[f] = 0;
  }
};

struct PathElement {
  int feature;
  double zero_fraction;
  double one_fraction;
  double weight;
};

void extend_path(std::vector<PathElement>& m, double pz, double po, int feature) {
  const std::size_t l = m.size();
  m.push_back({feature, pz, po, l == 0 ? 1.0 : 0.0});
  for (std::size_t i = l; i-- > 0;) {
    m[i + 1].weight += po * m[i].weight * static_cast<double>(i + 1) / static_cast<double>(l + 1);
    m[i].weight = pz * m[i].weight * static_cast<double>(l - i) / static_cast<double>(l + 1);
  }
}

void unwind_path(std::vector<PathElement>& m, std::size_t i) {
  const std::size_t l = m.size() - 1;
  const double o = m[i].one_fraction, zf = m[i].zero_fraction;
  double next = m[l].weight;
  for (std::size_t j = l; j-- > 0;) {
    if (o != 0.0) {
      const double t = m[j].weight;
      m[j].weight = next * static_cast<double>(l + 1) / (static_cast<double>(j + 1) * o);
      next = t - m[j].weight * zf * static_cast<double>(l - j) / static_cast<double>(l + 1);
    } else {
      m[j].weight = m[j].weight * static_cast<double>(l + 1) / (zf * static_cast<double>(l - j));
    }
  }
  for (std::size_t j = i; j < l; ++j) {
    m[j].feature = m[j + 1].feature;
    m[j].zero_fraction = m[j + 1].zero_fraction;
    m[j].one_fraction = m[j + 1].one_fraction;
  }
  m.pop_back();
}

double unwound_sum(const std::vector<PathElement>& m, std::size_t i) {
  const std::size_t l = m.size() - 1;
  const double o = m[i].one_fraction, zf = m[i].zero_fraction;
  double next = m[l].weight, total = 0.0;
  for (std::size_t j = l; j-- > 0;) {
    if (o != 0.0) {
      const double t = next * static_cast<double>(l + 1) / (static_cast<double>(j + 1) * o);
      total += t;
      next = m[j].weight - t * zf * static_cast<double>(l - j) / static_cast<double>(l + 1);
    } else {
      total += m[j].weight * static_cast<double>(l + 1) / (zf * static_cast<double>(l - j));
    }
  }
  return total;
}

void path_recurse(const Tree& tree, std::span<const double> x, std::vector<double>& phi, double scale,
                  std::size_t node, std::vector<PathElement> m, double pz, double po, int pi) {
  extend_path(m, pz, po, pi);
  const TreeNode& n = tree.nodes[node];
  if (n.feature < 0) {
    for (std::size_t i = 1; i < m.size(); ++i) {
      const double w = unwound_sum(m, i);
      phi[static_cast<std::size_t>(m[i].feature)] += w * (m[i].one_fraction - m[i].zero_fraction) * scale * n.value;
    }
    return;
  }
  const auto f = static_cast<std::size_t>(n.feature);
  const auto hot = static_cast<std::size_t>(x[f] <= n.threshold ? n.left : n.right);
  const auto cold = static_cast<std::size_t>(hot == static_cast<std::size_t>(n.left) ? n.right : n.left);
  double iz = 1.0, io = 1.0;
  for (std::size_t k = 1; k < m.size(); ++k) {
    if (m[k].feature == n.feature) {
      iz = m[k].zero_fraction;
      io = m[k].one_fraction;
      unwind_path(m, k);
      break;
    }
  }
  path_recurse(tree, x, phi, scale, hot, m, iz * tree.nodes[hot].cover / n.cover, io, n.feature);
  path_recurse(tree, x, phi, scale, cold, m, iz * tree.nodes[cold].cover / n.cover, 0.0, n.feature);
}

double expected_value(const Tree& tree, std::size_t node) {
  const TreeNode& n = tree.nodes[node];
  if (n.feature < 0) return n.value;
  const auto l = static_cast<std::size_t>(n.left), r = static_cast<std::size_t>(n.right);
  return (tree.nodes[l].cover * expected_value(tree, l) + tree.nodes[r].cover * expected_value(tree, r)) / n.cover;
}

}  // namespace

std::optional<TreeShapMode> tree_shap_mode_from_name(std::string_view name) {
  if (name == "interventional") return TreeShapMode::kInterventional;
  if (name == "path_dependent") return TreeShapMode::kPathDependent;
  return std::nullopt;
}

Attribution linear_shap(const LinearModel& model, std::span<const double> x, std::span<const double> reference) {
  require_fitted(model);
  Attribution a;
  a.base = model.predict(reference);
  const auto& w = model.weights();
  for (std::size_t f = 0; f < w.size(); ++f) a.phi.push_back(w[f] * (x[f] - reference[f]));
  return a;
}

Attribution interventional_tree_shap(const TreeEnsemble& model, std::span<const double> x,
                                     std::span<const double> reference) {
  require_fitted(model);
  Attribution a;
  a.phi.assign(x.size(), 0.0);
  a.base = model.predict(reference);
  for (const auto& t : model.trees()) {
    InterventionalWalk walk{t, x, reference, a.phi, model.scale(), std::vector<int>(x.size(), 0), {}, {}};
    walk.visit(0);
  }
  return a;
}

Attribution path_dependent_tree_shap(const TreeEnsemble& model, std::span<const double> x) {
  require_fitted(model);
  Attribution a;
  a.phi.assign(x.size(), 0.0);
  a.base = model.offset();
  for (const auto& t : model.trees()) {
    a.base += model.scale() * expected_value(t, 0);
    path_recurse(t, x, a.phi, model.scale(), 0, {}, 1.0, 1.0, -1);
  }
  return a;
}

Attribution permutation_shap(const Regressor& model, std::span<const double> x, std::span<const double> reference,
                             const SamplingOptions& options) {
  require_fitted(model);
  if (options.permutations < 2) throw Error(ErrorCode::kPrecondition, "need at least two permutations");
  const std::size_t f = x.size();
  Attribution a;
  a.base = model.predict(reference);
  const double full = model.predict(x);
  std::vector<double> sum(f, 0.0), sum_sq(f, 0.0), current(reference.begin(), reference.end());
  std::vector<std::size_t> order(f);
  Rng rng(options.seed);
  for (std::size_t p = 0; p < options.permutations; ++p) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::copy(reference.begin(), reference.end(), current.begin());
    double prev = a.base;
    for (auto i : order) {
      current[i] = x[i];
      // The last switch reproduces x exactly, so reuse f(x) to keep the
      // telescoping sum anchored at the true prediction.
      const double next = i == order.back() ? full : model.predict(current);
      const double d = next - prev;
      sum[i] += d;
      sum_sq[i] += d * d;
      prev = next;
    }
  }
  const auto k = static_cast<double>(options.permutations);
  a.phi.resize(f);
  a.standard_error.resize(f);
  for (std::size_t i = 0; i < f; ++i) {
    a.phi[i] = sum[i] / k;
    const double var = std::max(0.0, (sum_sq[i] - k * a.phi[i] * a.phi[i]) / (k - 1.0));
    a.standard_error[i] = std::sqrt(var / k);
  }
  double total = 0.0, mass = 0.0;
  for (double v : a.phi) {
    total += v;
    mass += std::abs(v);
  }
  a.raw_residual = (full - a.base) - total;
  if (a.raw_residual != 0.0) {
    for (std::size_t i = 0; i < f; ++i)
      a.phi[i] += a.raw_residual * (mass > 0.0 ? std::abs(a.phi[i]) / mass : 1.0 / static_cast<double>(f));
  }
  return a;
}

}  // namespace retrolens::model
