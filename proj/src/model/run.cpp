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

#include "retrolens/model/run.hpp"

#include <algorithm>
#include <thread>

#include "retrolens/error.hpp"
#include "retrolens/numeric.hpp"

namespace retrolens::model {
namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<double> column_means(const Matrix& x) {
  std::vector<double> m(x.front().size(), 0.0);
  for (const auto& r : x)
    for (std::size_t j = 0; j < r.size(); ++j) m[j] += r[j];
  for (auto& v : m) v /= static_cast<double>(x.size());
  return m;
}

}  // namespace

std::string make_run_id(const std::string& clip_id, const std::string& target, std::uint64_t seed) {
  Fnv1a h;
  h.update(clip_id).update(std::string_view("\x1f", 1)).update(target).update(std::string_view("\x1f", 1));
  h.update_value(seed);
  return "run-" + hex64(h.digest());
}

std::uint64_t family_seed(std::uint64_t seed, ModelFamily family) {
  return Fnv1a{}.update_value(seed).update_value(static_cast<int>(family)).digest();
}

FittedRun fit_and_select(const fusion::ModelMatrix& matrix, std::uint64_t seed, const ModelingOptions& options) {
  const std::size_t n = matrix.rows();
  if (n < kMinModelRows)
    throw Error(ErrorCode::kTooFewRows, "modeling needs at least " + std::to_string(kMinModelRows) + " rows, got " +
                                           std::to_string(n));
  for (std::size_t i = 1; i < n; ++i)
    if (matrix.minute_ts[i] <= matrix.minute_ts[i - 1])
      throw Error(ErrorCode::kUnsortedStream, "model matrix rows must be in chronological order");
  if (options.families.empty()) throw Error(ErrorCode::kPrecondition, "no model families requested");

  FittedRun out;
  ModelRun& run = out.run;
  run.run_id = make_run_id(matrix.clip_id, matrix.target, seed);
  run.clip_id = matrix.clip_id;
  run.target = matrix.target;
  run.seed = seed;
  run.features = matrix.columns;
  run.channels = matrix.channels;
  run.minute_ts = matrix.minute_ts;
  run.actual = matrix.y;
  run.media_missing = matrix.media_missing;
  run.lag_missing = matrix.lag_missing;
  run.train_rows = n * 7 / 10;
  run.test_rows = n - run.train_rows;

  const Matrix train_x(matrix.x.begin(), matrix.x.begin() + static_cast<long>(run.train_rows));
  const std::vector<double> train_y(matrix.y.begin(), matrix.y.begin() + static_cast<long>(run.train_rows));
  const Matrix test_x(matrix.x.begin() + static_cast<long>(run.train_rows), matrix.x.end());
  const std::vector<double> test_y(matrix.y.begin() + static_cast<long>(run.train_rows), matrix.y.end());

  const std::size_t k = options.families.size();
  run.reports.resize(k);
  std::vector<std::exception_ptr> failures(k);
  auto train_one = [&](std::size_t i) {
    try {
      const auto family = options.families[i];
      auto model = make_regressor(family);
      model->fit(train_x, train_y, family_seed(seed, family));
      FamilyReport& r = run.reports[i];
      r.family = family;
      r.test_predictions = model->predict_all(test_x);
      r.mae = mean_absolute_error(r.test_predictions, test_y);
      const auto mape = mean_absolute_percentage_error(r.test_predictions, test_y);
      r.mape = mape.value;
      r.mape_excluded = mape.excluded;
    } catch (...) {
      failures[i] = std::current_exception();
    }
  };
  if (options.concurrent) {
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < k; ++i) workers.emplace_back(train_one, i);
    for (auto& w : workers) w.join();
  } else {
    for (std::size_t i = 0; i < k; ++i) train_one(i);
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);

  std::vector<MetricRow> rows;
  for (const auto& r : run.reports) rows.push_back({r.mae, r.mape});
  const Selection sel = select_winner(rows);
  for (std::size_t i = 0; i < k; ++i) run.reports[i].composite = sel.composite[i];
  run.winner = run.reports[sel.winner].family;
  run.mae_only = sel.mae_only;

  out.model = make_regressor(run.winner);
  out.model->fit(matrix.x, matrix.y, family_seed(seed, run.winner));
  run.predictions = out.model->predict_all(matrix.x);
  run.background = column_means(matrix.x);
  return out;
}

AttributionMatrix shapley_attribution(const Regressor& model, const Matrix& x, const std::vector<double>& background,
                                      std::uint64_t seed, const ModelingOptions& options) {
  if (!model.fitted()) throw Error(ErrorCode::kUnfittedModel, "attribution needs a fitted model");
  AttributionMatrix out;
  std::vector<Attribution> per_row(x.size());
  const auto* linear = dynamic_cast<const LinearModel*>(&model);
  const auto* ensemble = dynamic_cast<const TreeEnsemble*>(&model);
  if (linear != nullptr) {
    out.method = "linear_exact";
  } else if (ensemble != nullptr) {
    out.method = options.tree_shap == TreeShapMode::kInterventional ? "tree_interventional" : "tree_path_dependent";
  } else {
    out.method = "permutation_sampling";
  }
  auto attribute_row = [&](std::size_t i) {
    if (linear != nullptr) {
      per_row[i] = linear_shap(*linear, x[i], background);
    } else if (ensemble != nullptr) {
      per_row[i] = options.tree_shap == TreeShapMode::kInterventional
                       ? interventional_tree_shap(*ensemble, x[i], background)
                       : path_dependent_tree_shap(*ensemble, x[i]);
    } else {
      per_row[i] = permutation_shap(model, x[i], background,
                                    {options.permutations, Fnv1a{}.update_value(seed).update_value(i).digest()});
    }
  };
  const std::size_t threads = options.concurrent ? std::max(1u, std::min(4u, std::thread::hardware_concurrency())) : 1;
  if (threads > 1) {
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < threads; ++t)
      workers.emplace_back([&, t] {
        for (std::size_t i = t; i < x.size(); i += threads) attribute_row(i);
      });
    for (auto& w : workers) w.join();
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) attribute_row(i);
  }
  for (auto& a : per_row) {
    out.base = a.base;
    out.phi.push_back(std::move(a.phi));
    if (!a.standard_error.empty()) out.standard_error.push_back(std::move(a.standard_error));
    out.max_raw_residual = std::max(out.max_raw_residual, std::abs(a.raw_residual));
    out.additivity_restored = out.additivity_restored || a.raw_residual != 0.0;
  }
  return out;
}

ModelRun run_model(const fusion::ModelMatrix& matrix, std::uint64_t seed, const ModelingOptions& options) {
  FittedRun fitted = fit_and_select(matrix, seed, options);
  ModelRun run = std::move(fitted.run);
  auto attr = shapley_attribution(*fitted.model, matrix.x, run.background, seed, options);
  run.base_value = attr.base;
  run.shap = std::move(attr.phi);
  run.shap_standard_error = std::move(attr.standard_error);
  run.shap_method = std::move(attr.method);
  run.additivity_restored = attr.additivity_restored;
  run.max_raw_residual = attr.max_raw_residual;
  return run;
}

json ModelRun::to_json() const {
  json reports_json = json::array();
  for (const auto& r : reports)
    reports_json.push_back({{"model", family_name(r.family)},
                            {"mae", r.mae},
                            {"mape", optional_number(r.mape)},
                            {"mape_excluded", r.mape_excluded},
                            {"composite", r.composite},
                            {"winner", r.family == winner},
                            {"test_predictions", r.test_predictions}});
  json channel_names = json::array();
  for (auto c : channels) channel_names.push_back(fusion::channel_name(c));
  return {{"format", kFormat},
          {"version", kVersion},
          {"run_id", run_id},
          {"clip_id", clip_id},
          {"target", target},
          {"seed", seed},
          {"features", features},
          {"channels", channel_names},
          {"minute_ts", minute_ts},
          {"actual", actual},
          {"media_missing", media_missing},
          {"lag_missing", lag_missing},
          {"train_rows", train_rows},
          {"test_rows", test_rows},
          {"models", reports_json},
          {"winner", family_name(winner)},
          {"mae_only", mae_only},
          {"predictions", predictions},
          {"background", background},
          {"base_value", base_value},
          {"shap", shap},
          {"shap_standard_error", shap_standard_error},
          {"shap_method", shap_method},
          {"additivity_restored", additivity_restored},
          {"max_raw_residual", max_raw_residual}};
}

ModelRun ModelRun::from_json(const json& doc) {
  if (doc.value("format", std::string()) != kFormat || doc.value("version", 0) != kVersion)
    throw Error(ErrorCode::kSchemaViolation, "not a version 1 model run document");
  ModelRun r;
  try {
    r.run_id = doc.at("run_id").get<std::string>();
    r.clip_id = doc.at("clip_id").get<std::string>();
    r.target = doc.at("target").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.features = doc.at("features").get<std::vector<std::string>>();
    for (const auto& c : doc.at("channels")) {
      auto ch = fusion::channel_from_name(c.get<std::string>());
      if (!ch) throw Error(ErrorCode::kSchemaViolation, "unknown channel in model run");
      r.channels.push_back(*ch);
    }
    r.minute_ts = doc.at("minute_ts").get<std::vector<corpus::EpochSeconds>>();
    r.actual = doc.at("actual").get<std::vector<double>>();
    r.media_missing = doc.at("media_missing").get<std::vector<bool>>();
    r.lag_missing = doc.at("lag_missing").get<std::vector<bool>>();
    r.train_rows = doc.at("train_rows").get<std::size_t>();
    r.test_rows = doc.at("test_rows").get<std::size_t>();
    for (const auto& m : doc.at("models")) {
      FamilyReport fr;
      auto fam = family_from_name(m.at("model").get<std::string>());
      if (!fam) throw Error(ErrorCode::kSchemaViolation, "unknown model family in model run");
      fr.family = *fam;
      fr.mae = m.at("mae").get<double>();
      if (!m.at("mape").is_null()) fr.mape = m.at("mape").get<double>();
      fr.mape_excluded = m.at("mape_excluded").get<std::size_t>();
      fr.composite = m.at("composite").get<double>();
      fr.test_predictions = m.at("test_predictions").get<std::vector<double>>();
      r.reports.push_back(std::move(fr));
    }
    auto winner = family_from_name(doc.at("winner").get<std::string>());
    if (!winner) throw Error(ErrorCode::kSchemaViolation, "unknown winner in model run");
    r.winner = *winner;
    r.mae_only = doc.at("mae_only").get<bool>();
    r.predictions = doc.at("predictions").get<std::vector<double>>();
    r.background = doc.at("background").get<std::vector<double>>();
    r.base_value = doc.at("base_value").get<double>();
    r.shap = doc.at("shap").get<Matrix>();
    r.shap_standard_error = doc.at("shap_standard_error").get<Matrix>();
    r.shap_method = doc.at("shap_method").get<std::string>();
    r.additivity_restored = doc.at("additivity_restored").get<bool>();
    r.max_raw_residual = doc.at("max_raw_residual").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("malformed model run: ") + e.what());
  }
  return r;
}

}  // namespace retrolens::model
