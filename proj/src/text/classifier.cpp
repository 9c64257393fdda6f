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

#include "retrolens/text/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "retrolens/error.hpp"
#include "retrolens/numeric.hpp"

namespace retrolens::text {
namespace {

using json = nlohmann::json;

void softmax(std::array<double, kCategoryCount>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    s += v;
  }
  for (double& v : z) v /= s;
}

std::size_t argmax(const std::array<double, kCategoryCount>& p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

void check_filled(const std::vector<LabeledSentence>& corpus, std::size_t minimum) {
  std::array<std::size_t, kCategoryCount> counts{};
  for (const auto& s : corpus) ++counts[index_of(s.label)];
  for (std::size_t c = 0; c < kCategoryCount; ++c)
    if (counts[c] < minimum)
      throw Error(ErrorCode::kCategoryUnderfilled, std::string(kCategoryNames[c]) + " has " +
                                                       std::to_string(counts[c]) + " sentences, need " +
                                                       std::to_string(minimum));
}

}  // namespace

std::vector<std::size_t> stratified_folds(const std::vector<PitchCategory>& labels, std::size_t folds,
                                          std::uint64_t seed) {
  std::vector<std::size_t> fold(labels.size(), 0);
  Rng rng(seed);
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (index_of(labels[i]) == c) members.push_back(i);
    rng.shuffle(members);
    for (std::size_t k = 0; k < members.size(); ++k) fold[members[k]] = k % folds;
  }
  return fold;
}

void PitchClassifier::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) index_.emplace(vocabulary_[i], i);
}

PitchClassifier::SparseRow PitchClassifier::featurize(std::string_view sentence) const {
  std::map<std::size_t, double> tf;
  for (const auto& tok : tokenize(sentence)) {
    auto it = index_.find(tok);
    if (it != index_.end()) tf[it->second] += 1.0;
  }
  SparseRow row;
  double norm = 0.0;
  for (auto [j, count] : tf) {
    const double v = count * idf_[j];
    row.emplace_back(j, v);
    norm += v * v;
  }
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (auto& [j, v] : row) v /= norm;
  }
  return row;
}

PitchClassifier PitchClassifier::fit(const std::vector<LabeledSentence>& corpus, double l2,
                                     const TrainingOptions& options) {
  PitchClassifier model;
  model.l2_ = l2;
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(corpus.size());
  std::map<std::string, std::size_t> df;
  for (const auto& s : corpus) {
    tokens.push_back(tokenize(s.text));
    std::set<std::string> uniq(tokens.back().begin(), tokens.back().end());
    for (const auto& t : uniq) ++df[t];
  }
  const double n_docs = static_cast<double>(corpus.size());
  for (const auto& [term, count] : df) {
    model.vocabulary_.push_back(term);
    model.idf_.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  model.rebuild_index();

  const std::size_t vocab = model.vocabulary_.size();
  std::vector<SparseRow> rows;
  rows.reserve(corpus.size());
  for (const auto& s : corpus) rows.push_back(model.featurize(s.text));

  // Full-batch gradient descent with heavy-ball momentum on mean
  // cross-entropy + (l2 / 2) * ||W||^2. Bias is not regularized.
  std::vector<double>& w = model.weights_;
  w.assign(kCategoryCount * vocab, 0.0);
  std::array<double, kCategoryCount>& b = model.bias_;
  b.fill(0.0);
  std::vector<double> vel_w(w.size(), 0.0), grad_w(w.size(), 0.0);
  std::array<double, kCategoryCount> vel_b{}, grad_b{};
  const double inv_n = 1.0 / n_docs;
  for (std::size_t iter = 0; iter < options.iterations; ++iter) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    grad_b.fill(0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::array<double, kCategoryCount> z = b;
      for (std::size_t c = 0; c < kCategoryCount; ++c)
        for (auto [j, v] : rows[i]) z[c] += w[c * vocab + j] * v;
      softmax(z);
      z[index_of(corpus[i].label)] -= 1.0;
      for (std::size_t c = 0; c < kCategoryCount; ++c) {
        grad_b[c] += z[c] * inv_n;
        for (auto [j, v] : rows[i]) grad_w[c * vocab + j] += z[c] * v * inv_n;
      }
    }
    for (std::size_t k = 0; k < w.size(); ++k) {
      vel_w[k] = options.momentum * vel_w[k] - options.learning_rate * (grad_w[k] + l2 * w[k]);
      w[k] += vel_w[k];
    }
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      vel_b[c] = options.momentum * vel_b[c] - options.learning_rate * grad_b[c];
      b[c] += vel_b[c];
    }
  }
  return model;
}

PitchClassifier PitchClassifier::train(const std::vector<LabeledSentence>& corpus, const TrainingOptions& options) {
  check_filled(corpus, options.min_per_category);
  std::vector<PitchCategory> labels;
  for (const auto& s : corpus) labels.push_back(s.label);
  const auto fold = stratified_folds(labels, options.folds, options.seed);

  CvReport report;
  report.seed = options.seed;
  report.l2_grid = options.l2_grid;
  std::vector<std::vector<double>> per_fold(options.l2_grid.size());
  for (std::size_t g = 0; g < options.l2_grid.size(); ++g) {
    for (std::size_t f = 0; f < options.folds; ++f) {
      std::vector<LabeledSentence> train, test;
      for (std::size_t i = 0; i < corpus.size(); ++i) (fold[i] == f ? test : train).push_back(corpus[i]);
      const PitchClassifier m = fit(train, options.l2_grid[g], options);
      std::size_t correct = 0;
      for (const auto& s : test) correct += m.classify(s.text).category == s.label ? 1 : 0;
      per_fold[g].push_back(test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size()));
    }
    report.grid_mean_accuracy.push_back(mean(per_fold[g]));
  }
  // First strength reaching the best mean accuracy wins.
  std::size_t best = 0;
  for (std::size_t g = 1; g < options.l2_grid.size(); ++g)
    if (report.grid_mean_accuracy[g] > report.grid_mean_accuracy[best]) best = g;
  report.chosen_l2 = options.l2_grid[best];
  report.fold_accuracy = per_fold[best];
  report.mean_accuracy = report.grid_mean_accuracy[best];

  PitchClassifier model = fit(corpus, report.chosen_l2, options);
  model.report_ = std::move(report);
  return model;
}

ClassifyResult PitchClassifier::classify(std::string_view sentence) const {
  if (sentence.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw Error(ErrorCode::kEmptySentence, "cannot classify an empty sentence");
  ClassifyResult result;
  const SparseRow row = featurize(sentence);
  if (row.empty()) {
    // No known terms: fall back to the uniform prior.
    result.probabilities.fill(1.0 / static_cast<double>(kCategoryCount));
    result.category = PitchCategory::kTraffic;
    return result;
  }
  const std::size_t vocab = vocabulary_.size();
  std::array<double, kCategoryCount> z = bias_;
  for (std::size_t c = 0; c < kCategoryCount; ++c)
    for (auto [j, v] : row) z[c] += weights_[c * vocab + j] * v;
  softmax(z);
  result.probabilities = z;
  result.category = static_cast<PitchCategory>(argmax(z));
  return result;
}

json PitchClassifier::to_json() const {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["vocabulary"] = vocabulary_;
  doc["idf"] = idf_;
  doc["weights"] = weights_;
  doc["bias"] = bias_;
  doc["l2"] = l2_;
  doc["metadata"] = {{"seed", report_.seed},
                     {"l2_grid", report_.l2_grid},
                     {"grid_mean_accuracy", report_.grid_mean_accuracy},
                     {"chosen_l2", report_.chosen_l2},
                     {"fold_accuracy", report_.fold_accuracy},
                     {"mean_accuracy", report_.mean_accuracy}};
  return doc;
}

PitchClassifier PitchClassifier::from_json(const json& doc) {
  if (doc.value("format", "") != kFormat) throw Error(ErrorCode::kSchemaViolation, "not a pitch classifier checkpoint");
  if (doc.value("version", 0) != kVersion)
    throw Error(ErrorCode::kSchemaViolation, "unsupported checkpoint version");
  PitchClassifier m;
  try {
    m.vocabulary_ = doc.at("vocabulary").get<std::vector<std::string>>();
    m.idf_ = doc.at("idf").get<std::vector<double>>();
    m.weights_ = doc.at("weights").get<std::vector<double>>();
    m.bias_ = doc.at("bias").get<std::array<double, kCategoryCount>>();
    m.l2_ = doc.at("l2").get<double>();
    const json& md = doc.at("metadata");
    m.report_.seed = md.at("seed").get<std::uint64_t>();
    m.report_.l2_grid = md.at("l2_grid").get<std::vector<double>>();
    m.report_.grid_mean_accuracy = md.at("grid_mean_accuracy").get<std::vector<double>>();
    m.report_.chosen_l2 = md.at("chosen_l2").get<double>();
    m.report_.fold_accuracy = md.at("fold_accuracy").get<std::vector<double>>();
    m.report_.mean_accuracy = md.at("mean_accuracy").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("bad checkpoint: ") + e.what());
  }
  if (m.idf_.size() != m.vocabulary_.size() || m.weights_.size() != m.vocabulary_.size() * kCategoryCount)
    throw Error(ErrorCode::kSchemaViolation, "checkpoint dimensions disagree");
  m.rebuild_index();
  return m;
}

void PitchClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << to_json().dump() << "\n";
}

PitchClassifier PitchClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "checkpoint not found: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return from_json(json::parse(buffer.str()));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("bad checkpoint: ") + e.what());
  }
}

}  // namespace retrolens::text
