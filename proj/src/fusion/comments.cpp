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

#include "retrolens/fusion/comments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>

#include "retrolens/error.hpp"
#include "retrolens/text/pitch.hpp"

namespace retrolens::fusion {

std::vector<std::vector<double>> TfidfSvdEmbedding::embed(const std::vector<std::string>& texts) const {
  const std::size_t n = texts.size();
  std::map<std::string, std::size_t> vocab;
  std::vector<std::map<std::size_t, double>> tf(n);
  std::vector<std::vector<std::string>> tokens(n);
  for (std::size_t i = 0; i < n; ++i) {
    tokens[i] = text::tokenize(texts[i]);
    for (const auto& t : tokens[i]) vocab.emplace(t, 0);
  }
  std::size_t next = 0;
  for (auto& [term, idx] : vocab) idx = next++;
  std::vector<double> df(vocab.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& t : tokens[i]) tf[i][vocab[t]] += 1.0;
    for (const auto& [j, c] : tf[i]) df[j] += 1.0;
  }
  if (n == 0) return {};
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(std::max<std::size_t>(vocab.size(), 1)));
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (const auto& [j, c] : tf[i]) {
      const double w = c * (std::log((1.0 + static_cast<double>(n)) / (1.0 + df[j])) + 1.0);
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
      norm += w * w;
    }
    if (norm > 0.0) m.row(static_cast<Eigen::Index>(i)) /= std::sqrt(norm);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const auto rank_cap = static_cast<std::size_t>(svd.singularValues().size());
  const std::size_t dims = std::max<std::size_t>(1, std::min({max_dims_, n > 1 ? n - 1 : 1, rank_cap}));
  std::vector<std::vector<double>> out(n, std::vector<double>(dims));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dims; ++d)
      out[i][d] = svd.matrixU()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) *
                  svd.singularValues()(static_cast<Eigen::Index>(d));
  return out;
}

double effective_perplexity(double configured, std::size_t n) {
  return std::min(configured, max_perplexity(n) - 1e-3);
}

std::string palette_color(double t) {
  static constexpr std::array<std::array<double, 3>, 5> kStops = {
      {{0x44, 0x01, 0x54}, {0x3b, 0x52, 0x8b}, {0x21, 0x91, 0x8c}, {0x5e, 0xc9, 0x62}, {0xfd, 0xe7, 0x25}}};
  t = std::clamp(std::isfinite(t) ? t : 0.5, 0.0, 1.0);
  const double pos = t * static_cast<double>(kStops.size() - 1);
  const auto lo = std::min(static_cast<std::size_t>(pos), kStops.size() - 2);
  const double frac = pos - static_cast<double>(lo);
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c)
    rgb[c] = static_cast<int>(std::lround(kStops[lo][c] + (kStops[lo + 1][c] - kStops[lo][c]) * frac));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

CommentColors comment_colors(const std::vector<std::string>& texts, const TsneOptions& options,
                             const CommentEmbeddingProvider& embedding) {
  CommentColors out;
  const std::size_t n = texts.size();
  const auto fallback = [&] {
    out.fallback = true;
    out.scalars.assign(n, 0.5);
    out.colors.assign(n, palette_color(0.5));
    return out;
  };
  if (n < 4) return fallback();
  // Repeated texts are projected once so they share a scalar exactly; t-SNE
  // alone only pulls them close together.
  const auto rows = embedding.embed(texts);
  std::vector<std::vector<double>> unique;
  std::vector<std::size_t> slot(n);
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, fresh] = seen.emplace(texts[i], unique.size());
    if (fresh) unique.push_back(rows[i]);
    slot[i] = it->second;
  }
  if (unique.size() < 4) return fallback();
  TsneOptions o = options;
  o.out_dim = 1;
  o.perplexity = effective_perplexity(options.perplexity, unique.size());
  const auto projection = tsne(unique, o);
  out.perplexity = o.perplexity;
  out.initial_kl = projection.initial_kl;
  out.final_kl = projection.final_kl;
  double lo = projection.coordinates[0][0], hi = lo;
  for (const auto& c : projection.coordinates) {
    lo = std::min(lo, c[0]);
    hi = std::max(hi, c[0]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double x = projection.coordinates[slot[i]][0];
    const double s = hi > lo ? (x - lo) / (hi - lo) : 0.5;
    out.scalars.push_back(s);
    out.colors.push_back(palette_color(s));
  }
  return out;
}

std::vector<long> comment_segments(const std::vector<corpus::CommentEvent>& comments,
                                   std::span<const corpus::TimeSpan> segments, corpus::EpochSeconds session_start) {
  std::vector<long> out;
  out.reserve(comments.size());
  for (const auto& c : comments) {
    // Floor to the containing whole second; ts_ms is never negative.
    const corpus::EpochSeconds t = session_start + c.ts_ms / 1000;
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](corpus::EpochSeconds v, const corpus::TimeSpan& s) { return v < s.start; });
    long idx = -1;
    if (it != segments.begin() && std::prev(it)->contains(t)) idx = static_cast<long>(std::prev(it) - segments.begin());
    out.push_back(idx);
  }
  return out;
}

std::vector<std::vector<Keyword>> segment_keywords(const std::vector<corpus::CommentEvent>& comments,
                                                   std::span<const corpus::TimeSpan> segments,
                                                   corpus::EpochSeconds session_start, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::kPrecondition, "keyword count must be at least 1");
  const auto owner = comment_segments(comments, segments, session_start);
  std::vector<std::map<std::string, double>> tf(segments.size());
  for (std::size_t i = 0; i < comments.size(); ++i) {
    if (owner[i] < 0) continue;
    for (const auto& t : text::tokenize(comments[i].text)) tf[static_cast<std::size_t>(owner[i])][t] += 1.0;
  }
  std::map<std::string, double> sf;
  for (const auto& seg : tf)
    for (const auto& [term, c] : seg) sf[term] += 1.0;
  const double s = static_cast<double>(segments.size());
  std::vector<std::vector<Keyword>> out(segments.size());
  for (std::size_t g = 0; g < segments.size(); ++g) {
    auto& kw = out[g];
    for (const auto& [term, c] : tf[g]) kw.push_back({term, c * (std::log((1.0 + s) / (1.0 + sf[term])) + 1.0)});
    std::sort(kw.begin(), kw.end(), [](const Keyword& a, const Keyword& b) {
      return a.weight != b.weight ? a.weight > b.weight : a.term < b.term;
    });
    if (kw.size() > k) kw.resize(k);
  }
  return out;
}

}  // namespace retrolens::fusion
