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

#include "retrolens/model/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "retrolens/error.hpp"

namespace retrolens::model {
namespace {

std::vector<std::size_t> channel_indices(std::span<const std::string> features, const ChannelMap& map) {
  std::vector<std::size_t> out;
  for (const auto& f : features) {
    auto it = map.find(f);
    if (it == map.end()) throw Error(ErrorCode::kUnmappedFeature, "feature '" + f + "' has no channel");
    out.push_back(static_cast<std::size_t>(it->second));
  }
  return out;
}

void check_width(const Matrix& shap, std::size_t width) {
  for (const auto& r : shap)
    if (r.size() != width) throw Error(ErrorCode::kPrecondition, "shap row width does not match the feature list");
}

}  // namespace

ChannelMap default_channel_map(std::span<const std::string> features) {
  ChannelMap m;
  for (const auto& f : features)
    if (auto c = fusion::channel_of_column(f)) m.emplace(f, *c);
  return m;
}

Matrix aggregate_rows(const Matrix& shap, std::span<const corpus::EpochSeconds> minute_ts,
                      std::span<const corpus::TimeSpan> segments) {
  if (shap.size() != minute_ts.size()) throw Error(ErrorCode::kPrecondition, "one timestamp per shap row");
  const std::size_t width = shap.empty() ? 0 : shap.front().size();
  Matrix out(segments.size(), std::vector<double>(width, 0.0));
  for (std::size_t r = 0; r < shap.size(); ++r)
    for (std::size_t s = 0; s < segments.size(); ++s)
      if (segments[s].contains(minute_ts[r]))
        for (std::size_t j = 0; j < width; ++j) out[s][j] += shap[r][j];
  return out;
}

std::vector<ChannelRow> summarize_channels(const Matrix& shap, std::span<const std::string> features,
                                           const ChannelMap& map) {
  const auto idx = channel_indices(features, map);
  check_width(shap, features.size());
  std::vector<ChannelRow> out(shap.size());
  for (std::size_t r = 0; r < shap.size(); ++r) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      auto& part = out[r][idx[j]];
      if (shap[r][j] > 0.0) part.positive += shap[r][j];
      if (shap[r][j] < 0.0) part.negative += shap[r][j];
    }
    for (auto& part : out[r]) part.sum = part.positive + part.negative;
  }
  return out;
}

std::vector<MerchandiseSummary> summarize_merchandise(const Matrix& shap, std::span<const std::string> features,
                                                      const ChannelMap& map,
                                                      std::span<const corpus::EpochSeconds> minute_ts,
                                                      std::span<const double> target, const corpus::Clip& clip,
                                                      const corpus::SessionManifest& manifest) {
  const auto idx = channel_indices(features, map);
  check_width(shap, features.size());
  if (shap.size() != minute_ts.size() || target.size() != minute_ts.size())
    throw Error(ErrorCode::kPrecondition, "shap rows, timestamps and target must align");
  std::vector<const corpus::MerchandiseEntry*> items;
  for (const auto& id : clip.merchandise_ids)
    for (const auto& m : manifest.merchandise)
      if (m.merchandise_id == id) items.push_back(&m);
  std::vector<MerchandiseSummary> out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    MerchandiseSummary s;
    s.merchandise_id = items[k]->merchandise_id;
    s.title = items[k]->title;
    s.price = items[k]->price;
    const auto start = std::max(items[k]->launch_ts, clip.span.start);
    const auto end = k + 1 < items.size() ? std::min(items[k + 1]->launch_ts, clip.span.end) : clip.span.end;
    s.interval = {start, std::max(start, end)};
    double target_sum = 0.0;
    for (std::size_t r = 0; r < shap.size(); ++r) {
      if (!s.interval.contains(minute_ts[r])) continue;
      ++s.rows;
      target_sum += target[r];
      for (std::size_t j = 0; j < idx.size(); ++j) s.channel_sums[idx[j]] += shap[r][j];
    }
    s.averaged_target = s.rows > 0 ? target_sum / static_cast<double>(s.rows) : 0.0;
    double mass = 0.0;
    for (double v : s.channel_sums) mass += std::abs(v);
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      s.proportions[c] = mass > 0.0 ? std::abs(s.channel_sums[c]) / mass : 1.0 / static_cast<double>(kChannelCount);
      s.polarity[c] = s.channel_sums[c] > 0.0 ? 1 : (s.channel_sums[c] < 0.0 ? -1 : 0);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<FeatureSummary> summarize_features(const Matrix& shap, std::span<const std::string> features,
                                               const ChannelMap& map, std::optional<Channel> channel) {
  const auto idx = channel_indices(features, map);
  check_width(shap, features.size());
  std::vector<FeatureSummary> out;
  for (std::size_t j = 0; j < features.size(); ++j) {
    const auto c = static_cast<Channel>(idx[j]);
    if (channel && c != *channel) continue;
    FeatureSummary f;
    f.feature = features[j];
    f.channel = c;
    for (const auto& row : shap) {
      f.segment_values.push_back(row[j]);
      if (row[j] > 0.0) f.positives += row[j];
      if (row[j] < 0.0) f.negatives += row[j];
    }
    out.push_back(std::move(f));
  }
  std::stable_sort(out.begin(), out.end(), [](const FeatureSummary& a, const FeatureSummary& b) {
    return std::abs(a.positives) + std::abs(a.negatives) > std::abs(b.positives) + std::abs(b.negatives);
  });
  return out;
}

RadarOptions RadarOptions::from_config(const Config& config) {
  RadarOptions o;
  if (auto v = config.get("radar.attractiveness_terms")) {
    o.attractiveness_terms.clear();
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(' '));
      item.erase(item.find_last_not_of(' ') + 1);
      auto m = corpus::metric_from_name(item);
      if (!m) throw Error(ErrorCode::kValidation, "radar.attractiveness_terms: unknown statistic '" + item + "'");
      o.attractiveness_terms.push_back(*m);
    }
    if (o.attractiveness_terms.empty()) throw Error(ErrorCode::kValidation, "radar.attractiveness_terms is empty");
  }
  return o;
}

std::vector<StreamerSummary> streamer_summary(const corpus::SessionCorpus& corpus,
                                              const fusion::SessionFeatures& features, const corpus::Clip& clip,
                                              const RadarOptions& options) {
  using corpus::Metric;
  std::vector<const corpus::StatsRow*> rows;
  for (const auto& r : corpus.stats)
    if (clip.span.contains(r.minute_ts)) rows.push_back(&r);
  std::vector<double> online(rows.size());
  double running = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    running += (*rows[i])[Metric::kEntries] - (*rows[i])[Metric::kDepartures];
    online[i] = running;
    peak = std::max(peak, running);
  }

  std::vector<StreamerSummary> out;
  for (const auto& st : corpus.manifest.streamers) {
    StreamerSummary s;
    s.streamer_id = st.streamer_id;
    s.display_name = st.display_name;
    for (const auto& sh : st.shifts) {
      const corpus::TimeSpan piece{std::max(sh.start, clip.span.start), std::min(sh.end, clip.span.end)};
      if (piece.start < piece.end) s.spans.push_back(piece);
    }
    std::sort(s.spans.begin(), s.spans.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    double online_sum = 0.0, numer = 0.0, stay = 0.0, conversion = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto ts = rows[i]->minute_ts;
      if (std::none_of(s.spans.begin(), s.spans.end(), [&](const auto& p) { return p.contains(ts); })) continue;
      ++s.minutes;
      online_sum += peak > 0.0 ? online[i] / peak : 0.0;
      s.views += (*rows[i])[Metric::kEntries];
      for (auto m : options.attractiveness_terms) numer += (*rows[i])[m];
      stay += (*rows[i])[Metric::kAvgStaySeconds];
      conversion += (*rows[i])[Metric::kConversionRate];
    }
    if (s.minutes == 0) continue;
    const auto n = static_cast<double>(s.minutes);
    s.avg_online_rate = online_sum / n;
    s.attractiveness = s.views > 0.0 ? numer / s.views : 0.0;
    s.avg_stay = stay / n;
    s.conversion_rate = conversion / n;
    s.glyph = fusion::aggregate_union(features, s.spans, corpus.manifest.start_ts);
    out.push_back(std::move(s));
  }
  if (out.empty()) throw Error(ErrorCode::kNoShiftInClip, "no streamer is on air during clip " + clip.clip_id);
  return out;
}

}  // namespace retrolens::model
