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

#include "retrolens/corpus/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "retrolens/corpus/io.hpp"
#include "retrolens/error.hpp"
#include "retrolens/numeric.hpp"
#include "retrolens/text/synth.hpp"

namespace retrolens::corpus {
namespace {

using nlohmann::json;

double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

struct MinuteDrivers {
  double gain_db = -10.0;
  double f0_hz = 200.0;
  int syllable_rate = 4;
  std::vector<std::pair<int, int>> pauses_ms;  // [start, end) within the minute
  double closeup_prob = 0.5;
  int expression = 6;
  std::array<double, text::kCategoryCount> pitch_mix{};
  double comment_rate = 4.0;
};

// Ground-truth linear model for sales_amount.
constexpr double kIntercept = 200.0;
constexpr double kEntriesCoef = 12.0;
constexpr double kLikesCoef = 5.0;
constexpr double kSubscribesCoef = 30.0;
constexpr double kNoiseSigma = 25.0;

}  // namespace

SessionCorpus synthesize_session(const SynthOptions& options, json* ground_truth) {
  if (options.minutes < 5) throw Error(ErrorCode::kPrecondition, "synthetic sessions need at least 5 minutes");
  if (options.batches < 1) throw Error(ErrorCode::kPrecondition, "at least one batch");
  if (options.sample_rate < 16000) throw Error(ErrorCode::kPrecondition, "sample rate must be at least 16000 Hz");
  const int minutes = options.minutes;
  const int media_minutes = options.media_minutes < 0 ? minutes : std::min(options.media_minutes, minutes);
  Rng rng(options.seed);

  SessionCorpus c;
  auto& m = c.manifest;
  m.session_id = "synth-" + std::to_string(options.seed);
  m.start_ts = kSynthStartTs;
  m.end_ts = kSynthStartTs + static_cast<EpochSeconds>(minutes) * 60;

  const EpochSeconds half = m.start_ts + static_cast<EpochSeconds>(minutes / 2) * 60;
  m.streamers = {{"host-a", "Host A", {{m.start_ts, half}}}, {"host-b", "Host B", {{half, m.end_ts}}}};

  static const std::vector<std::string> kTitles = {"Wool Coat", "Denim Jacket", "Silk Scarf", "Knit Sweater",
                                                   "Rain Boots", "Linen Dress", "Down Vest", "Cargo Pants"};
  const int items = std::max(2, std::min(minutes / 5, 12));
  const int spacing = std::max(1, minutes / items);
  const int batches = std::min(options.batches, items);
  for (int i = 0; i < items; ++i) {
    MerchandiseEntry e;
    e.merchandise_id = "m" + std::to_string(i + 1);
    e.title = kTitles[static_cast<std::size_t>(i) % kTitles.size()];
    e.price = round_to(rng.uniform(19.9, 199.0), 1);
    e.launch_ts = m.start_ts + static_cast<EpochSeconds>(i * spacing) * 60;
    e.batch_id = i * batches / items;
    m.merchandise.push_back(std::move(e));
  }
  double mean_price = 0.0;
  for (const auto& e : m.merchandise) mean_price += e.price;
  mean_price /= static_cast<double>(items);

  std::vector<MinuteDrivers> drivers(static_cast<std::size_t>(minutes));
  for (auto& d : drivers) {
    d.gain_db = rng.uniform(-16.0, -6.0);
    d.f0_hz = rng.uniform(150.0, 260.0);
    d.syllable_rate = 3 + static_cast<int>(rng.index(4));
    const int n_pauses = static_cast<int>(rng.index(3));
    std::vector<int> slots = {5, 15, 25, 35, 45};
    rng.shuffle(slots);
    for (int p = 0; p < n_pauses; ++p) {
      const int start = slots[static_cast<std::size_t>(p)] * 1000 + static_cast<int>(rng.index(100));
      d.pauses_ms.emplace_back(start, start + 400 + static_cast<int>(rng.index(500)));
    }
    std::sort(d.pauses_ms.begin(), d.pauses_ms.end());
    d.closeup_prob = rng.uniform(0.1, 0.9);
    static const std::array<int, 10> kExpressionBag = {3, 3, 3, 6, 6, 6, 5, 4, 0, 2};
    d.expression = kExpressionBag[rng.index(kExpressionBag.size())];
    double s = 0.0;
    for (auto& w : d.pitch_mix) {
      w = 0.2 + rng.uniform();
      s += w;
    }
    for (auto& w : d.pitch_mix) w /= s;
    d.comment_rate = rng.uniform(2.0, 8.0);
  }

  // Audio: a three-harmonic voice-like carrier, amplitude-modulated into
  // syllable bursts, with silent pauses and a -65 dBFS noise floor.
  c.audio.sample_rate = options.sample_rate;
  const auto sr = static_cast<std::size_t>(options.sample_rate);
  c.audio.samples.resize(static_cast<std::size_t>(media_minutes) * 60 * sr);
  const double noise = std::pow(10.0, -65.0 / 20.0);
  double phase = 0.0;
  for (int mi = 0; mi < media_minutes; ++mi) {
    const auto& d = drivers[static_cast<std::size_t>(mi)];
    const double amp = std::pow(10.0, d.gain_db / 20.0) / 1.75;
    const double dphase = 2.0 * std::numbers::pi * d.f0_hz / static_cast<double>(sr);
    std::size_t pause_idx = 0;
    for (std::size_t k = 0; k < 60 * sr; ++k) {
      const std::size_t idx = static_cast<std::size_t>(mi) * 60 * sr + k;
      const double t_in_minute_ms = 1000.0 * static_cast<double>(k) / static_cast<double>(sr);
      while (pause_idx < d.pauses_ms.size() && d.pauses_ms[pause_idx].second <= t_in_minute_ms) ++pause_idx;
      const bool in_pause =
          pause_idx < d.pauses_ms.size() && d.pauses_ms[pause_idx].first <= t_in_minute_ms;
      double v = noise * rng.normal();
      if (!in_pause) {
        const double t_in_second = static_cast<double>(k % sr) / static_cast<double>(sr);
        const double env = std::pow(std::sin(std::numbers::pi * d.syllable_rate * t_in_second), 2.0);
        v += amp * env * (std::sin(phase) + 0.5 * std::sin(2.0 * phase) + 0.25 * std::sin(3.0 * phase));
      }
      phase = std::fmod(phase + dphase, 2.0 * std::numbers::pi);
      c.audio.samples[idx] = static_cast<float>(std::clamp(v, -1.0, 1.0));
    }
  }
  // Quantize once so the in-memory buffer equals what a WAV round trip yields.
  for (float& s : c.audio.samples) {
    const double q = std::clamp(std::round(static_cast<double>(s) * 32768.0), -32768.0, 32767.0);
    s = static_cast<float>(q / 32768.0);
  }

  const SessionMs media_end_ms = static_cast<SessionMs>(media_minutes) * 60000;
  auto streamer_at = [&](SessionMs ms) {
    return m.start_ts + ms / 1000 < half ? std::string("host-a") : std::string("host-b");
  };

  // Transcript.
  for (SessionMs t = 300; t < media_end_ms;) {
    const auto dur = static_cast<SessionMs>(rng.uniform(1500.0, 4500.0));
    if (t + dur > media_end_ms) break;
    const auto& d = drivers[static_cast<std::size_t>(t / 60000)];
    double u = rng.uniform();
    std::size_t cat = 0;
    while (cat + 1 < text::kCategoryCount && u >= d.pitch_mix[cat]) u -= d.pitch_mix[cat++];
    c.transcript.push_back({t, t + dur, text::sample_pitch_sentence(static_cast<text::PitchCategory>(cat), rng),
                            streamer_at(t)});
    t += dur + static_cast<SessionMs>(rng.uniform(200.0, 1000.0));
  }

  // Frames at 2 fps.
  constexpr int kFrameW = 1280, kFrameH = 720;
  for (SessionMs t = 0; t < media_end_ms; t += 500) {
    const auto& d = drivers[static_cast<std::size_t>(t / 60000)];
    FrameAnnotation f{t, kFrameW, kFrameH, {}};
    if (rng.uniform() < 0.85) {
      Face face;
      const double side = rng.uniform() < d.closeup_prob ? rng.uniform(300.0, 380.0) : rng.uniform(120.0, 200.0);
      face.bbox = {std::floor(rng.uniform(0.0, kFrameW - side)), std::floor(rng.uniform(0.0, kFrameH - side)), side,
                   side};
      double s = 0.0;
      for (std::size_t k = 0; k < kExpressionCount; ++k) {
        face.expr_probs[k] = static_cast<int>(k) == d.expression ? rng.uniform(2.0, 5.0) : rng.uniform(0.0, 0.5);
        s += face.expr_probs[k];
      }
      for (auto& p : face.expr_probs) p /= s;
      f.faces.push_back(face);
    }
    c.frames.push_back(std::move(f));
  }

  // Comments and per-minute statistics.
  std::vector<int> topics;
  for (int mi = 0; mi < minutes; ++mi) {
    const auto& d = drivers[static_cast<std::size_t>(mi)];
    const int n = rng.poisson(d.comment_rate);
    std::vector<SessionMs> ts;
    for (int k = 0; k < n; ++k) ts.push_back(static_cast<SessionMs>(mi) * 60000 + static_cast<SessionMs>(rng.index(60000)));
    std::sort(ts.begin(), ts.end());
    for (SessionMs t : ts) {
      const int topic = rng.uniform() < 0.5 ? 0 : 1;
      topics.push_back(topic);
      c.comments.push_back({t, "u" + std::to_string(rng.index(500)), text::sample_comment(topic, rng)});
    }

    StatsRow row;
    row.minute_ts = m.start_ts + static_cast<EpochSeconds>(mi) * 60;
    const double entries = std::max(0.0, std::round(rng.normal(45.0 + 8.0 * d.closeup_prob, 6.0)));
    const double likes = rng.poisson(15.0 + 2.0 * d.syllable_rate);
    const double subscribes = rng.poisson(3.0);
    row[Metric::kEntries] = entries;
    row[Metric::kDepartures] = std::max(0.0, std::round(0.8 * entries + rng.normal(0.0, 3.0)));
    row[Metric::kLikes] = likes;
    row[Metric::kComments] = n;
    row[Metric::kSubscribes] = subscribes;
    row[Metric::kConversionRate] = round_to(rng.uniform(0.01, 0.12), 4);
    row[Metric::kAvgStaySeconds] = round_to(rng.uniform(40.0, 120.0), 2);
    row[Metric::kCancels] = rng.poisson(1.0);
    row[Metric::kExposureClickRatio] = round_to(rng.uniform(0.05, 0.4), 4);
    row[Metric::kClickTurnoverRatio] = round_to(rng.uniform(0.05, 0.5), 4);
    const double sales = std::max(
        0.0, round_to(kIntercept + kEntriesCoef * entries + kLikesCoef * likes + kSubscribesCoef * subscribes +
                          rng.normal(0.0, kNoiseSigma),
                      2));
    row[Metric::kSalesAmount] = sales;
    row[Metric::kSalesVolume] = std::round(sales / mean_price);
    row[Metric::kGpm] = round_to(sales * 1000.0 / std::max(entries, 1.0), 2);
    row[Metric::kUvValue] = round_to(sales / std::max(entries, 1.0), 4);
    c.stats.push_back(row);
  }

  if (ground_truth != nullptr) {
    json gt;
    gt["seed"] = options.seed;
    gt["minutes"] = minutes;
    gt["media_minutes"] = media_minutes;
    gt["target"] = "sales_amount";
    gt["intercept"] = kIntercept;
    gt["coefficients"] = {{"entries", kEntriesCoef}, {"likes", kLikesCoef}, {"subscribes", kSubscribesCoef}};
    gt["noise_sigma"] = kNoiseSigma;
    json per_minute = json::array();
    for (const auto& d : drivers) {
      json pauses = json::array();
      for (auto [a, b] : d.pauses_ms) pauses.push_back({a, b});
      per_minute.push_back({{"gain_db", d.gain_db},
                            {"f0_hz", d.f0_hz},
                            {"syllable_rate", d.syllable_rate},
                            {"pauses_ms", pauses},
                            {"closeup_prob", d.closeup_prob},
                            {"expression", std::string(kExpressionNames[static_cast<std::size_t>(d.expression)])},
                            {"comment_rate", d.comment_rate}});
    }
    gt["minute_drivers"] = per_minute;
    gt["comment_topics"] = topics;
    *ground_truth = std::move(gt);
  }
  return c;
}

std::filesystem::path synth_corpus(const SynthOptions& options, const std::filesystem::path& directory) {
  json gt;
  SessionCorpus c = synthesize_session(options, &gt);
  const auto manifest = save_session(c, directory);
  std::ofstream out(directory / "ground_truth.json", std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write ground truth");
  out << gt.dump(2) << "\n";
  return manifest;
}

}  // namespace retrolens::corpus
