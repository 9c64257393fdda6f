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
#include <string>
#include <vector>

#include "retrolens/corpus/types.hpp"
#include "retrolens/fusion/tsne.hpp"

namespace retrolens::fusion {

// Turns comment texts into dense vectors for projection.
class CommentEmbeddingProvider {
 public:
  virtual ~CommentEmbeddingProvider() = default;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const = 0;
  virtual std::string name() const = 0;
};

// L2-normalized TF-IDF rows reduced by truncated SVD to min(max_dims, N-1)
// dimensions.
class TfidfSvdEmbedding final : public CommentEmbeddingProvider {
 public:
  explicit TfidfSvdEmbedding(std::size_t max_dims = 50) : max_dims_(max_dims) {}
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override;
  std::string name() const override { return "tfidf-svd"; }

 private:
  std::size_t max_dims_;
};

struct CommentColors {
  std::vector<double> scalars;     // in [0, 1]
  std::vector<std::string> colors;  // "#rrggbb" from the fixed gradient palette
  bool fallback = false;           // fewer than four comments: everything at 0.5
  double perplexity = 0.0;         // effective perplexity used for the 1-D projection
  double initial_kl = 0.0;
  double final_kl = 0.0;
};

// Perplexity actually used for n points: the configured value, lowered just
// under the admissible bound when n is small.
double effective_perplexity(double configured, std::size_t n);

// Fixed five-stop gradient sampled at t in [0, 1].
std::string palette_color(double t);

CommentColors comment_colors(const std::vector<std::string>& texts, const TsneOptions& options,
                             const CommentEmbeddingProvider& embedding = TfidfSvdEmbedding());

struct Keyword {
  std::string term;
  double weight = 0.0;
  friend bool operator==(const Keyword&, const Keyword&) = default;
};

// Top-k terms of every segment by term frequency within the segment times
// inverse segment frequency ln((1+S)/(1+sf)) + 1 over the clip's S segments.
// Ties are broken lexicographically.
std::vector<std::vector<Keyword>> segment_keywords(const std::vector<corpus::CommentEvent>& comments,
                                                   std::span<const corpus::TimeSpan> segments,
                                                   corpus::EpochSeconds session_start, std::size_t k);

// Index of the segment containing each comment, or -1.
std::vector<long> comment_segments(const std::vector<corpus::CommentEvent>& comments,
                                   std::span<const corpus::TimeSpan> segments, corpus::EpochSeconds session_start);

}  // namespace retrolens::fusion
