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

#include "retrolens/fusion/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "retrolens/error.hpp"
#include "retrolens/numeric.hpp"

namespace retrolens::fusion {
namespace {

double kl_divergence(const std::vector<double>& p, const std::vector<double>& y, std::size_t n, int dim) {
  std::vector<double> num(n * n, 0.0);
  double sum_q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = 0.0;
      for (int k = 0; k < dim; ++k) {
        const double diff = y[i * dim + k] - y[j * dim + k];
        d += diff * diff;
      }
      num[i * n + j] = num[j * n + i] = 1.0 / (1.0 + d);
      sum_q += 2.0 * num[i * n + j];
    }
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || p[i * n + j] <= 0.0) continue;
      const double q = std::max(num[i * n + j] / sum_q, 1e-300);
      kl += p[i * n + j] * std::log(p[i * n + j] / q);
    }
  return kl;
}

}  // namespace

TsneOptions TsneOptions::from_config(const Config& config) {
  TsneOptions o;
  o.perplexity = config.get_double("tsne.perplexity", o.perplexity);
  o.iterations = static_cast<int>(config.get_int("tsne.iters", o.iterations));
  if (!(o.perplexity > 0.0)) throw Error(ErrorCode::kValidation, "tsne.perplexity must be positive");
  if (o.iterations < 1) throw Error(ErrorCode::kValidation, "tsne.iters must be at least 1");
  return o;
}

double calibrate_row(const std::vector<double>& sq_dist, std::size_t self, double perplexity, double tolerance,
                     std::vector<double>& row) {
  const std::size_t n = sq_dist.size();
  row.assign(n, 0.0);
  const double target_bits = std::log2(perplexity);
  double d_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j)
    if (j != self) d_min = std::min(d_min, sq_dist[j]);

  double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
  double bits = 0.0;
  for (int it = 0; it < 200; ++it) {
    double sum = 0.0, weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == self) continue;
      // Shifting by the nearest distance leaves the normalized row unchanged.
      const double shifted = sq_dist[j] - d_min;
      row[j] = std::exp(-beta * shifted);
      sum += row[j];
      weighted += shifted * row[j];
    }
    bits = (std::log(sum) + beta * weighted / sum) / std::numbers::ln2;
    for (double& v : row) v /= sum;
    const double err = bits - target_bits;
    if (std::abs(err) < tolerance) break;
    if (err > 0.0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
    } else {
      hi = beta;
      beta = (beta + lo) / 2.0;
    }
  }
  return bits;
}

ProjectionResult tsne(const std::vector<std::vector<double>>& points, const TsneOptions& options) {
  const std::size_t n = points.size();
  if (n < 4) throw Error(ErrorCode::kTooFewPoints, "t-SNE needs at least 4 points, got " + std::to_string(n));
  if (!(options.perplexity < max_perplexity(n)))
    throw Error(ErrorCode::kPerplexityTooLarge, "perplexity must be below (N-1)/3 = " + std::to_string(max_perplexity(n)));
  if (options.out_dim != 1 && options.out_dim != 2) throw Error(ErrorCode::kPrecondition, "out_dim must be 1 or 2");
  const std::size_t dim_in = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim_in) throw Error(ErrorCode::kPrecondition, "t-SNE points must share one dimension");
  const int dim = options.out_dim;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });

  std::vector<double> p(n * n, 0.0);
  ProjectionResult result;
  {
    std::vector<double> sq(n), row;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& xi = points[order[i]];
      for (std::size_t j = 0; j < n; ++j) {
        const auto& xj = points[order[j]];
        double d = 0.0;
        for (std::size_t k = 0; k < dim_in; ++k) d += (xi[k] - xj[k]) * (xi[k] - xj[k]);
        sq[j] = d;
      }
      const double bits = calibrate_row(sq, i, options.perplexity, options.perplexity_tolerance, row);
      result.max_perplexity_error = std::max(result.max_perplexity_error, std::abs(bits - std::log2(options.perplexity)));
      for (std::size_t j = 0; j < n; ++j) p[i * n + j] = row[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::max((p[i * n + j] + p[j * n + i]) / (2.0 * static_cast<double>(n)), 1e-12);
      p[i * n + j] = p[j * n + i] = v;
    }
  for (std::size_t i = 0; i < n; ++i) p[i * n + i] = 0.0;

  std::vector<double> y(n * static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    Fnv1a h;
    h.update_value(options.seed);
    for (double v : points[order[i]]) h.update_value(v);
    Rng rng(h.digest());
    for (int k = 0; k < dim; ++k) y[i * dim + k] = 1e-4 * rng.normal();
  }
  result.initial_kl = kl_divergence(p, y, n, dim);

  const double learning_rate =
      options.learning_rate > 0.0 ? options.learning_rate : std::max(1.0, static_cast<double>(n) / options.exaggeration);
  std::vector<double> update(y.size(), 0.0), gains(y.size(), 1.0), grad(y.size()), num(n * n);
  for (int it = 0; it < options.iterations; ++it) {
    const double exaggeration = it < options.exaggeration_iterations ? options.exaggeration : 1.0;
    const double momentum = it < options.momentum_switch ? options.initial_momentum : options.final_momentum;
    double sum_q = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        double d = 0.0;
        for (int k = 0; k < dim; ++k) {
          const double diff = y[i * dim + k] - y[j * dim + k];
          d += diff * diff;
        }
        num[i * n + j] = num[j * n + i] = 1.0 / (1.0 + d);
        sum_q += 2.0 * num[i * n + j];
      }
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double w = 4.0 * (exaggeration * p[i * n + j] - num[i * n + j] / sum_q) * num[i * n + j];
        for (int k = 0; k < dim; ++k) grad[i * dim + k] += w * (y[i * dim + k] - y[j * dim + k]);
      }
    for (std::size_t k = 0; k < y.size(); ++k) {
      const bool same_sign = (grad[k] > 0.0) == (update[k] > 0.0);
      gains[k] = same_sign ? std::max(gains[k] * 0.8, 0.01) : gains[k] + 0.2;
      update[k] = momentum * update[k] - learning_rate * gains[k] * grad[k];
      y[k] += update[k];
    }
    for (int k = 0; k < dim; ++k) {
      double c = 0.0;
      for (std::size_t i = 0; i < n; ++i) c += y[i * dim + k];
      c /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) y[i * dim + k] -= c;
    }
  }
  result.final_kl = kl_divergence(p, y, n, dim);
  result.iterations = options.iterations;
  result.seed = options.seed;
  result.perplexity = options.perplexity;
  result.coordinates.assign(n, std::vector<double>(static_cast<std::size_t>(dim)));
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < dim; ++k) result.coordinates[order[i]][static_cast<std::size_t>(k)] = y[i * dim + k];
  return result;
}

}  // namespace retrolens::fusion
