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

#include "retrolens/service/engine.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "retrolens/audio/features.hpp"
#include "retrolens/corpus/io.hpp"
#include "retrolens/error.hpp"
#include "retrolens/fusion/grid.hpp"
#include "retrolens/fusion/model_matrix.hpp"
#include "retrolens/fusion/tsne.hpp"
#include "retrolens/model/target.hpp"
#include "retrolens/numeric.hpp"
#include "retrolens/text/synth.hpp"

#ifndef RETROLENS_SOURCE_DIR
#define RETROLENS_SOURCE_DIR "."
#endif

namespace retrolens::service {
namespace {

namespace fs = std::filesystem;
using corpus::EpochSeconds;
using corpus::Metric;
using nlohmann::json;

json versioned(json body) {
  body["version"] = kApiVersion;
  return body;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp);
    out << text;
    if (!out) throw Error(ErrorCode::kIoError, "write failed on " + tmp);
  }
  fs::rename(tmp, path);
}

json five_json(const audio::FiveNumber& f) {
  return {{"min", f.min}, {"q1", f.q1}, {"median", f.median}, {"q3", f.q3}, {"max", f.max}, {"count", f.count}};
}

json spread_json(const fusion::Spread& s) { return {{"min", s.min}, {"median", s.median}, {"max", s.max}}; }

json expression_json(const frame::ExpressionSummary& e) {
  json hist = json::object();
  for (std::size_t i = 0; i < corpus::kExpressionCount; ++i) hist[std::string(corpus::kExpressionNames[i])] = e.histogram[i];
  return {{"primary", e.primary ? json(std::string(corpus::expression_name(*e.primary))) : json(nullptr)},
          {"frequency", e.frequency},
          {"histogram", hist}};
}

json pitch_counts_json(const text::PitchCounts& c) {
  json out = json::object();
  for (std::size_t i = 0; i < text::kCategoryCount; ++i) out[std::string(text::kCategoryNames[i])] = c[i];
  return out;
}

json camera_json(const std::array<std::int64_t, 3>& c) {
  json out = json::object();
  for (std::size_t i = 0; i < 3; ++i) out[std::string(frame::kCameraPositionNames[i])] = c[i];
  return out;
}

// Audio/text/face blocks of one aggregate, as used by glyphs and records.
json glyph_json(const fusion::SegmentAggregate& a) {
  return {{"audio",
           {{"volume", spread_json(a.volume)},
            {"pitch", spread_json(a.pitch)},
            {"speech_rate", spread_json(a.speech_rate)},
            {"pause", spread_json(a.pause)},
            {"pause_total_seconds", static_cast<double>(a.pause_total_ms) / 1000.0}}},
          {"text", pitch_counts_json(a.pitch_words)},
          {"face", expression_json(a.expression)},
          {"camera_seconds", camera_json(a.camera_seconds)},
          {"seconds", a.seconds},
          {"media_seconds", a.media_seconds},
          {"raw_vector", fusion::raw_segment_vector(a)}};
}

json channel_part_json(const model::ChannelPart& p) {
  return {{"sum", p.sum}, {"positive", p.positive}, {"negative", p.negative}};
}

double mean_metric_in(const corpus::SessionCorpus& c, const corpus::TimeSpan& span, Metric m, std::size_t* count = nullptr) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : c.stats)
    if (span.contains(r.minute_ts)) {
      s += r[m];
      ++n;
    }
  if (count != nullptr) *count = n;
  return n > 0 ? s / static_cast<double>(n) : 0.0;
}

int parse_granularity(int g) {
  if (g != 1 && g != 5) throw Error(ErrorCode::kValidation, "granularity must be 1 or 5");
  return g;
}

json session_summary(const corpus::SessionCorpus& c) {
  const auto& m = c.manifest;
  json merch = json::array();
  double gmv = 0.0, views = 0.0, pre_launch = 0.0;
  for (const auto& r : c.stats) views += r[Metric::kEntries];
  for (std::size_t k = 0; k < m.merchandise.size(); ++k) {
    const auto& e = m.merchandise[k];
    const corpus::TimeSpan interval{e.launch_ts, k + 1 < m.merchandise.size() ? m.merchandise[k + 1].launch_ts : m.end_ts};
    double sales = 0.0, volume = 0.0;
    std::vector<double> ecr, ctr;
    for (const auto& r : c.stats) {
      if (!interval.contains(r.minute_ts)) continue;
      sales += r[Metric::kSalesAmount];
      volume += r[Metric::kSalesVolume];
      ecr.push_back(r[Metric::kExposureClickRatio]);
      ctr.push_back(r[Metric::kClickTurnoverRatio]);
    }
    gmv += sales;
    json item = {{"merchandise_id", e.merchandise_id},
                 {"title", e.title},
                 {"price", e.price},
                 {"launch_ts", e.launch_ts},
                 {"batch_id", e.batch_id},
                 {"interval", {{"start_ts", interval.start}, {"end_ts", interval.end}}},
                 {"sales", sales},
                 {"volume", volume},
                 {"exposure_click_ratio", mean(ecr)},
                 {"click_turnover_ratio", mean(ctr)},
                 {"ratio_minutes", {{"exposure_click_ratio", ecr}, {"click_turnover_ratio", ctr}}}};
    if (e.thumbnail_path) item["thumbnail_path"] = *e.thumbnail_path;
    merch.push_back(std::move(item));
  }
  const EpochSeconds first_launch = m.merchandise.empty() ? m.end_ts : m.merchandise.front().launch_ts;
  for (const auto& r : c.stats)
    if (r.minute_ts < first_launch) pre_launch += r[Metric::kSalesAmount];
  json clips = json::array();
  for (const auto& clip : corpus::segment_clips(c)) {
    std::vector<double> ecr, ctr;
    for (const auto& r : c.stats)
      if (clip.span.contains(r.minute_ts)) {
        ecr.push_back(r[Metric::kExposureClickRatio]);
        ctr.push_back(r[Metric::kClickTurnoverRatio]);
      }
    clips.push_back({{"clip_id", clip.clip_id}, {"exposure_click_ratio", ecr}, {"click_turnover_ratio", ctr}});
  }
  json out = {{"session_id", m.session_id},
              {"start_ts", m.start_ts},
              {"end_ts", m.end_ts},
              {"duration_seconds", m.end_ts - m.start_ts},
              {"gmv", gmv},
              {"views", views},
              {"gpm", views > 0.0 ? gmv * 1000.0 / views : 0.0},
              {"pre_launch_sales", pre_launch},
              {"merchandise", merch},
              {"ratio_distributions", clips}};
  if (m.replay_path) out["replay_path"] = *m.replay_path;
  return out;
}

json clip_json(const corpus::Clip& c) {
  return {{"clip_id", c.clip_id},
          {"session_id", c.session_id},
          {"start_ts", c.span.start},
          {"end_ts", c.span.end},
          {"batch_id", c.batch_id},
          {"merchandise_ids", c.merchandise_ids}};
}

std::string session_of_clip(const std::string& clip_id) {
  const auto pos = clip_id.rfind("_b");
  if (pos == std::string::npos || pos + 2 >= clip_id.size()) return {};
  for (std::size_t i = pos + 2; i < clip_id.size(); ++i)
    if (clip_id[i] < '0' || clip_id[i] > '9') return {};
  return clip_id.substr(0, pos);
}

}  // namespace

std::optional<fs::path> resolve_corpus_root(const std::string& explicit_root) {
  if (!explicit_root.empty()) return fs::path(explicit_root);
  if (const char* env = std::getenv("RETROLENS_CORPUS"); env != nullptr && *env != '\0') return fs::path(env);
  return std::nullopt;
}

Engine::Engine(EngineOptions options) : options_(std::move(options)) {
  const auto& cfg = options_.config;
  if (!fs::is_directory(options_.corpus_root))
    throw Error(ErrorCode::kCorpusLoadError, "corpus root " + options_.corpus_root.string() + " is not a directory");
  cache_dir_ = cfg.get_string("server.cache_dir", (options_.corpus_root / ".retrolens").string());
  feature_config_ = fusion::FeatureConfig::from_config(cfg);
  tsne_options_ = fusion::TsneOptions::from_config(cfg);
  radar_options_ = model::RadarOptions::from_config(cfg);
  lag_target_ = cfg.get_bool("model.lag_target", true);
  const auto mode = cfg.get_string("model.tree_shap", "interventional");
  auto parsed = model::tree_shap_mode_from_name(mode);
  if (!parsed) throw Error(ErrorCode::kValidation, "model.tree_shap must be interventional or path_dependent");
  modeling_options_.tree_shap = *parsed;
  modeling_options_.permutations = static_cast<std::size_t>(cfg.get_int("model.permutations", 200));
  keyword_count_ = static_cast<std::size_t>(std::max<long long>(1, cfg.get_int("comments.keywords", 5)));
  default_seed_ = static_cast<std::uint64_t>(cfg.get_int("model.seed", 7));

  try {
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(options_.corpus_root)) {
      if (!entry.is_directory() || entry.path().filename().string().front() == '.') continue;
      if (fs::exists(entry.path() / "manifest.json")) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      const auto manifest = corpus::parse_manifest(read_text(d / "manifest.json"), (d / "manifest.json").string());
      if (!session_dirs_.emplace(manifest.session_id, d).second)
        throw Error(ErrorCode::kCorpusLoadError, "duplicate session id " + manifest.session_id);
    }
    if (options_.eager)
      for (const auto& [id, dir] : session_dirs_) sessions_[id] = corpus::load_session(dir);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorpusLoadError) throw;
    throw Error(ErrorCode::kCorpusLoadError, e.what());
  }
  records_ = std::make_unique<RecordStore>(cfg.get_string("server.records_path", (cache_dir_ / "records.jsonl").string()));
  jobs_ = std::make_unique<JobQueue>(static_cast<std::size_t>(std::max<long long>(1, cfg.get_int("server.workers", 2))));
}

Engine::~Engine() = default;

std::vector<std::string> Engine::session_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, d] : session_dirs_) ids.push_back(id);
  return ids;
}

std::shared_ptr<const corpus::SessionCorpus> Engine::session(const std::string& session_id) const {
  auto dir = session_dirs_.find(session_id);
  if (dir == session_dirs_.end()) throw Error(ErrorCode::kUnknownSession, "no session '" + session_id + "'");
  {
    std::lock_guard lock(mu_);
    if (auto it = sessions_.find(session_id); it != sessions_.end()) return it->second;
  }
  auto loaded = corpus::load_session(dir->second);
  std::lock_guard lock(mu_);
  return sessions_.emplace(session_id, std::move(loaded)).first->second;
}

Engine::ClipRef Engine::clip(const std::string& clip_id) const {
  const auto sid = session_of_clip(clip_id);
  if (sid.empty() || session_dirs_.count(sid) == 0) throw Error(ErrorCode::kUnknownClip, "no clip '" + clip_id + "'");
  auto c = session(sid);
  for (auto& clip : corpus::segment_clips(*c))
    if (clip.clip_id == clip_id) return {c, std::move(clip)};
  throw Error(ErrorCode::kUnknownClip, "no clip '" + clip_id + "'");
}

const text::PitchClassifier& Engine::classifier() const {
  std::call_once(classifier_once_, [this] {
    const auto configured = options_.config.get("text.pitch_corpus");
    const fs::path corpus_path = configured ? fs::path(*configured) : fs::path(RETROLENS_SOURCE_DIR) / "data" / "pitch_corpus.jsonl";
    std::vector<text::LabeledSentence> labeled;
    std::string source;
    if (fs::exists(corpus_path)) {
      source = read_text(corpus_path);
      labeled = text::read_labeled_jsonl(source, corpus_path.string());
    } else if (configured) {
      throw Error(ErrorCode::kMissingFile, "text.pitch_corpus " + corpus_path.string() + " does not exist");
    } else {
      labeled = text::generate_labeled_corpus(7, 100);
      source = text::write_labeled_jsonl(labeled);
    }
    classifier_hash_ = fnv1a(source);
    const auto checkpoint = cache_dir_ / ("classifier-" + hex64(classifier_hash_) + ".json");
    if (fs::exists(checkpoint)) {
      try {
        classifier_ = std::make_unique<text::PitchClassifier>(text::PitchClassifier::load(checkpoint));
        return;
      } catch (const Error&) {
        // Unreadable checkpoint: retrain and overwrite below.
      }
    }
    classifier_ = std::make_unique<text::PitchClassifier>(text::PitchClassifier::train(labeled));
    fs::create_directories(cache_dir_);
    classifier_->save(checkpoint);
  });
  return *classifier_;
}

std::uint64_t Engine::feature_key(const corpus::SessionCorpus& corpus) const {
  classifier();
  const auto& a = feature_config_.audio;
  Fnv1a h;
  h.update_value(corpus.source_hash).update_value(classifier_hash_);
  for (double v : {a.pitch_min_hz, a.pitch_max_hz, a.voicing_threshold, a.silence_floor_db, a.min_pause_ms,
                   a.frame_hop_ms, a.intensity_hop_ms, a.intensity_window_ms, a.min_dip_db, a.clamp_db,
                   feature_config_.frame.closeup_area_frac})
    h.update_value(v);
  return h.digest();
}

Engine::FeatureResult Engine::features(const std::string& session_id) const {
  auto c = session(session_id);
  const auto key = feature_key(*c);
  const auto path = cache_dir_ / "features" / (session_id + "-" + hex64(key) + ".json");
  const auto mem_key = session_id + "/" + hex64(key);
  {
    std::lock_guard lock(mu_);
    if (auto it = features_.find(mem_key); it != features_.end()) return {it->second, true, path};
  }
  std::shared_ptr<const fusion::SessionFeatures> f;
  bool hit = false;
  if (fs::exists(path)) {
    try {
      auto loaded = fusion::SessionFeatures::from_json(json::parse(read_text(path)));
      if (loaded.source_hash == c->source_hash && loaded.session_id == session_id) {
        f = std::make_shared<const fusion::SessionFeatures>(std::move(loaded));
        hit = true;
      }
    } catch (const std::exception&) {
      // Corrupt cache entry: recompute.
    }
  }
  if (!f) {
    f = std::make_shared<const fusion::SessionFeatures>(
        fusion::extract_session_features(*c, classifier(), feature_config_));
    write_text_atomic(path, f->to_json().dump());
  }
  std::lock_guard lock(mu_);
  auto [it, inserted] = features_.emplace(mem_key, f);
  return {it->second, hit, path};
}

std::uint64_t Engine::run_fingerprint(const std::string& session_id) const {
  auto c = session(session_id);
  Fnv1a h;
  h.update_value(feature_key(*c));
  h.update_value(lag_target_);
  h.update_value(static_cast<int>(modeling_options_.tree_shap));
  h.update_value(modeling_options_.permutations);
  return h.digest();
}

std::shared_ptr<const model::ModelRun> Engine::run(const std::string& clip_id, const std::string& target,
                                                   std::uint64_t seed) const {
  model::parse_target(target);
  auto ref = clip(clip_id);
  const auto run_id = model::make_run_id(clip_id, target, seed);
  {
    std::lock_guard lock(mu_);
    if (auto it = runs_.find(run_id); it != runs_.end()) return it->second;
  }
  const auto fingerprint = hex64(run_fingerprint(ref.clip.session_id));
  const auto path = cache_dir_ / "runs" / (run_id + ".json");
  std::shared_ptr<const model::ModelRun> result;
  if (fs::exists(path)) {
    try {
      const auto doc = json::parse(read_text(path));
      if (doc.at("fingerprint").get<std::string>() == fingerprint)
        result = std::make_shared<const model::ModelRun>(model::ModelRun::from_json(doc.at("run")));
    } catch (const std::exception&) {
      // Stale or corrupt: recompute.
    }
  }
  if (!result) {
    const auto f = features(ref.clip.session_id);
    const auto matrix = fusion::build_model_matrix(*ref.corpus, *f.features, ref.clip, target, lag_target_);
    result = std::make_shared<const model::ModelRun>(model::run_model(matrix, seed, modeling_options_));
    write_text_atomic(path, json{{"fingerprint", fingerprint}, {"run", result->to_json()}}.dump());
  }
  std::lock_guard lock(mu_);
  return runs_.emplace(run_id, result).first->second;
}

json Engine::submit_run(const std::string& clip_id, const std::string& target, std::uint64_t seed) {
  model::parse_target(target);
  clip(clip_id);
  const auto run_id = model::make_run_id(clip_id, target, seed);
  {
    std::lock_guard lock(mu_);
    run_requests_[run_id] = {clip_id, target, seed};
  }
  jobs_->forget_failed(run_id);
  jobs_->submit(run_id, [this, clip_id, target, seed] { run(clip_id, target, seed); });
  const auto st = jobs_->status(run_id);
  return versioned({{"run_id", run_id}, {"status", std::string(job_state_name(st ? st->state : JobState::kQueued))}});
}

std::shared_ptr<const model::ModelRun> Engine::find_run(const std::string& run_id) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = runs_.find(run_id); it != runs_.end()) return it->second;
  }
  // A run persisted by an earlier process is served once its inputs still match.
  const auto path = cache_dir_ / "runs" / (run_id + ".json");
  if (!fs::exists(path)) return nullptr;
  try {
    const auto doc = json::parse(read_text(path));
    auto r = model::ModelRun::from_json(doc.at("run"));
    if (r.run_id != run_id) return nullptr;
    return run(r.clip_id, r.target, r.seed);
  } catch (const std::exception&) {
    return nullptr;
  }
}

json Engine::run_json(const std::string& run_id) const {
  if (const auto st = jobs_->status(run_id); st && st->state != JobState::kDone) {
    json out = {{"run_id", run_id}, {"status", std::string(job_state_name(st->state))}};
    if (st->state == JobState::kFailed) out["error"] = {{"code", st->error_code}, {"message", st->error_message}};
    return versioned(out);
  }
  auto r = find_run(run_id);
  if (!r) throw Error(ErrorCode::kUnknownRun, "no model run '" + run_id + "'");
  json out = r->to_json();
  out["status"] = "done";
  return versioned(out);
}

json Engine::attributions_json(const std::string& run_id, const std::string& level, int granularity,
                               const std::string& channel) const {
  auto r = find_run(run_id);
  if (!r) {
    if (jobs_->status(run_id)) throw Error(ErrorCode::kValidation, "model run '" + run_id + "' is not finished");
    throw Error(ErrorCode::kUnknownRun, "no model run '" + run_id + "'");
  }
  parse_granularity(granularity);
  auto ref = clip(r->clip_id);
  const auto map = model::default_channel_map(r->features);
  const auto grid = fusion::build_grid(ref.clip, granularity);
  // Minute rows are the native resolution; coarser grids sum their rows.
  const model::Matrix shap = granularity == 1 ? r->shap : model::aggregate_rows(r->shap, r->minute_ts, grid.segments);
  std::vector<corpus::TimeSpan> spans;
  if (granularity == 1)
    for (auto ts : r->minute_ts) spans.push_back({ts, ts + 60});
  else
    spans = grid.segments;
  std::optional<fusion::Channel> filter;
  if (!channel.empty() && channel != "all") {
    filter = fusion::channel_from_name(channel);
    if (!filter) throw Error(ErrorCode::kValidation, "unknown channel '" + channel + "'");
  }
  json out = {{"run_id", run_id}, {"level", level}, {"granularity", granularity}, {"target", r->target},
              {"base_value", r->base_value}};
  if (level == "channel") {
    const auto rows = model::summarize_channels(shap, r->features, map);
    json segs = json::array();
    for (std::size_t s = 0; s < rows.size(); ++s) {
      json channels = json::object();
      for (std::size_t c = 0; c < fusion::kChannelCount; ++c)
        channels[std::string(fusion::kChannelNames[c])] = channel_part_json(rows[s][c]);
      json seg = {{"index", s}, {"start_ts", spans[s].start}, {"end_ts", spans[s].end}, {"channels", channels}};
      if (granularity == 1) seg["prediction"] = r->predictions[s];
      segs.push_back(std::move(seg));
    }
    out["segments"] = segs;
  } else if (level == "merchandise") {
    json items = json::array();
    for (const auto& m : model::summarize_merchandise(r->shap, r->features, map, r->minute_ts, r->actual, ref.clip,
                                                      ref.corpus->manifest)) {
      json sums = json::object(), props = json::object(), pol = json::object();
      for (std::size_t c = 0; c < fusion::kChannelCount; ++c) {
        const std::string name(fusion::kChannelNames[c]);
        sums[name] = m.channel_sums[c];
        props[name] = m.proportions[c];
        pol[name] = m.polarity[c];
      }
      items.push_back({{"merchandise_id", m.merchandise_id},
                       {"title", m.title},
                       {"price", m.price},
                       {"start_ts", m.interval.start},
                       {"end_ts", m.interval.end},
                       {"rows", m.rows},
                       {"channel_sums", sums},
                       {"proportions", props},
                       {"polarity", pol},
                       {"averaged_target", m.averaged_target}});
    }
    out["merchandise"] = items;
  } else if (level == "feature" || level == "segment") {
    json feats = json::array();
    for (const auto& f : model::summarize_features(shap, r->features, map, filter)) {
      json item = {{"feature", f.feature}, {"channel", std::string(fusion::channel_name(f.channel))}};
      if (level == "feature") {
        item["positives"] = f.positives;
        item["negatives"] = f.negatives;
      } else {
        item["values"] = f.segment_values;
      }
      feats.push_back(std::move(item));
    }
    out["features"] = feats;
    if (level == "segment") {
      json segs = json::array();
      for (std::size_t s = 0; s < spans.size(); ++s)
        segs.push_back({{"index", s}, {"start_ts", spans[s].start}, {"end_ts", spans[s].end}});
      out["segments"] = segs;
    }
  } else {
    throw Error(ErrorCode::kValidation, "level must be channel, merchandise, feature or segment");
  }
  return versioned(out);
}

json Engine::sessions_json() const {
  std::vector<std::shared_ptr<const corpus::SessionCorpus>> all;
  for (const auto& id : session_ids()) all.push_back(session(id));
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& a, const auto& b) { return a->manifest.start_ts < b->manifest.start_ts; });
  json list = json::array();
  for (const auto& c : all) list.push_back(session_summary(*c));
  return versioned({{"sessions", list}});
}

json Engine::session_json(const std::string& session_id) const {
  auto c = session(session_id);
  json out = session_summary(*c);
  json streamers = json::array();
  for (const auto& s : c->manifest.streamers) {
    json shifts = json::array();
    for (const auto& sh : s.shifts) shifts.push_back({{"start_ts", sh.start}, {"end_ts", sh.end}});
    streamers.push_back({{"streamer_id", s.streamer_id}, {"display_name", s.display_name}, {"shifts", shifts}});
  }
  out["streamers"] = streamers;
  json clips = json::array();
  for (const auto& clip : corpus::segment_clips(*c)) clips.push_back(clip_json(clip));
  out["clips"] = clips;
  out["source_hash"] = hex64(c->source_hash);
  return versioned(out);
}

json Engine::session_clips_json(const std::string& session_id) const {
  auto c = session(session_id);
  json clips = json::array();
  for (const auto& clip : corpus::segment_clips(*c)) clips.push_back(clip_json(clip));
  return versioned({{"session_id", session_id}, {"clips", clips}});
}

json Engine::clip_segments_json(const std::string& clip_id, int granularity) const {
  parse_granularity(granularity);
  auto ref = clip(clip_id);
  const auto grid = fusion::build_grid(ref.clip, granularity);
  const auto f = features(ref.clip.session_id);
  const auto aggregates = fusion::aggregate_segments(*f.features, grid.segments, ref.corpus->manifest.start_ts);
  const auto vectors = fusion::segment_vectors(aggregates);
  json segs = json::array();
  for (std::size_t s = 0; s < grid.segments.size(); ++s) {
    std::size_t minutes = 0;
    const double gpm = mean_metric_in(*ref.corpus, grid.segments[s], Metric::kGpm, &minutes);
    json glyph = glyph_json(aggregates[s]);
    glyph["gpm"] = gpm;
    glyph["stat_minutes"] = minutes;
    segs.push_back({{"index", s},
                    {"start_ts", grid.segments[s].start},
                    {"end_ts", grid.segments[s].end},
                    {"vector", vectors[s].values},
                    {"raw", vectors[s].raw},
                    {"glyph", glyph}});
  }
  return versioned({{"clip_id", clip_id},
                    {"granularity", granularity},
                    {"dimensions", fusion::segment_vector_names()},
                    {"segments", segs}});
}

json Engine::clip_features_json(const std::string& clip_id, const std::string& channel) const {
  auto ref = clip(clip_id);
  const bool all = channel.empty() || channel == "all";
  if (!all && !fusion::channel_from_name(channel)) throw Error(ErrorCode::kValidation, "unknown channel '" + channel + "'");
  const auto f = features(ref.clip.session_id);
  const auto& feats = *f.features;
  const auto start = ref.corpus->manifest.start_ts;
  const auto grid = fusion::build_grid(ref.clip, 1);
  const auto aggregates = fusion::aggregate_segments(feats, grid.segments, start);
  json out = {{"clip_id", clip_id}, {"channel", all ? "all" : channel}, {"start_ts", ref.clip.span.start},
              {"end_ts", ref.clip.span.end}, {"media_missing_minutes", json::array()}};
  for (std::size_t s = 0; s < grid.segments.size(); ++s)
    if (aggregates[s].media_seconds == 0) out["media_missing_minutes"].push_back(grid.segments[s].start);

  if (all || channel == "audio") {
    json minutes = json::array();
    for (const auto& seg : grid.segments) {
      std::vector<double> vol, pitch, rate, pause;
      for (auto t = seg.start; t < seg.end; ++t) {
        const auto i = t - start;
        if (i < 0 || static_cast<std::size_t>(i) >= feats.media_seconds) continue;
        const auto k = static_cast<std::size_t>(i);
        vol.push_back(feats.audio.volume_db[k]);
        if (feats.audio.pitch_hz[k] > 0.0) pitch.push_back(feats.audio.pitch_hz[k]);
        rate.push_back(feats.audio.speech_rate[k]);
        pause.push_back(static_cast<double>(feats.pause_ms[k]) / 1000.0);
      }
      double pause_total = 0.0;
      for (double p : pause) pause_total += p;
      minutes.push_back({{"start_ts", seg.start},
                         {"end_ts", seg.end},
                         {"volume_db", five_json(audio::five_number(vol))},
                         {"pitch_hz", five_json(audio::five_number(pitch))},
                         {"speech_rate", five_json(audio::five_number(rate))},
                         {"pause_seconds", pause_total}});
    }
    json pauses = json::array();
    const corpus::SessionClock clock(start);
    for (const auto& p : feats.audio.pauses) {
      const double a = clock.to_epoch(p.start_ms), b = clock.to_epoch(p.end_ms);
      if (b <= static_cast<double>(ref.clip.span.start) || a >= static_cast<double>(ref.clip.span.end)) continue;
      pauses.push_back({{"start_ts", a}, {"end_ts", b}});
    }
    out["audio"] = {{"minutes", minutes}, {"pauses", pauses}};
  }
  if (all || channel == "text") {
    json minutes = json::array();
    for (std::size_t s = 0; s < grid.segments.size(); ++s)
      minutes.push_back({{"start_ts", grid.segments[s].start},
                         {"end_ts", grid.segments[s].end},
                         {"words", pitch_counts_json(aggregates[s].pitch_words)},
                         {"total_words", aggregates[s].total_words}});
    out["text"] = {{"minutes", minutes}};
  }
  if (all || channel == "frame") {
    json minutes = json::array();
    for (std::size_t s = 0; s < grid.segments.size(); ++s)
      minutes.push_back({{"start_ts", grid.segments[s].start},
                         {"end_ts", grid.segments[s].end},
                         {"camera_seconds", camera_json(aggregates[s].camera_seconds)},
                         {"expression", expression_json(aggregates[s].expression)}});
    out["frame"] = {{"minutes", minutes}};
  }
  if (all || channel == "feedback") {
    json stats = json::array();
    for (const auto& r : ref.corpus->stats) {
      if (!ref.clip.span.contains(r.minute_ts)) continue;
      json row = {{"minute_ts", r.minute_ts}};
      for (std::size_t i = 0; i < corpus::kMetricCount; ++i) row[std::string(corpus::kMetricNames[i])] = r.values[i];
      stats.push_back(std::move(row));
    }
    json streamers = json::array();
    for (const auto& s : model::streamer_summary(*ref.corpus, feats, ref.clip, radar_options_)) {
      json spans = json::array();
      for (const auto& p : s.spans) spans.push_back({{"start_ts", p.start}, {"end_ts", p.end}});
      streamers.push_back({{"streamer_id", s.streamer_id},
                           {"display_name", s.display_name},
                           {"spans", spans},
                           {"minutes", s.minutes},
                           {"radar",
                            {{"avg_online_rate", s.avg_online_rate},
                             {"views", s.views},
                             {"attractiveness", s.attractiveness},
                             {"avg_stay", s.avg_stay},
                             {"conversion_rate", s.conversion_rate}}},
                           {"glyph", glyph_json(s.glyph)}});
    }
    out["feedback"] = {{"stats", stats}, {"streamers", streamers}};
  }
  return versioned(out);
}

json Engine::comments_summary_json(const std::string& clip_id, int granularity) const {
  parse_granularity(granularity);
  auto ref = clip(clip_id);
  const auto grid = fusion::build_grid(ref.clip, granularity);
  const auto start = ref.corpus->manifest.start_ts;
  std::vector<corpus::CommentEvent> in_clip;
  for (const auto& c : ref.corpus->comments) {
    const auto t = start + c.ts_ms / 1000;
    if (ref.clip.span.contains(t)) in_clip.push_back(c);
  }
  std::vector<std::string> texts;
  for (const auto& c : in_clip) texts.push_back(c.text);
  const auto colors = fusion::comment_colors(texts, tsne_options_);
  const auto owner = fusion::comment_segments(in_clip, grid.segments, start);
  const auto keywords = fusion::segment_keywords(in_clip, grid.segments, start, keyword_count_);
  const corpus::SessionClock clock(start);
  json comments = json::array();
  std::vector<std::size_t> volume(grid.segments.size(), 0);
  for (std::size_t i = 0; i < in_clip.size(); ++i) {
    if (owner[i] >= 0) ++volume[static_cast<std::size_t>(owner[i])];
    comments.push_back({{"ts", clock.to_epoch(in_clip[i].ts_ms)},
                        {"user_id", in_clip[i].user_id},
                        {"text", in_clip[i].text},
                        {"segment", owner[i]},
                        {"scalar", colors.scalars[i]},
                        {"color", colors.colors[i]}});
  }
  json segs = json::array();
  for (std::size_t s = 0; s < grid.segments.size(); ++s) {
    json kw = json::array();
    for (const auto& k : keywords[s]) kw.push_back({{"term", k.term}, {"weight", k.weight}});
    segs.push_back({{"index", s},
                    {"start_ts", grid.segments[s].start},
                    {"end_ts", grid.segments[s].end},
                    {"count", volume[s]},
                    {"keywords", kw}});
  }
  return versioned({{"clip_id", clip_id},
                    {"granularity", granularity},
                    {"comments", comments},
                    {"segments", segs},
                    {"projection",
                     {{"fallback", colors.fallback},
                      {"perplexity", colors.perplexity},
                      {"initial_kl", colors.initial_kl},
                      {"final_kl", colors.final_kl},
                      {"embedding", fusion::TfidfSvdEmbedding().name()}}}});
}

json Engine::projection_json(const std::string& clip_id, int granularity, std::uint64_t seed) const {
  parse_granularity(granularity);
  auto ref = clip(clip_id);
  const auto grid = fusion::build_grid(ref.clip, granularity);
  const auto f = features(ref.clip.session_id);
  const auto vectors =
      fusion::segment_vectors(fusion::aggregate_segments(*f.features, grid.segments, ref.corpus->manifest.start_ts));
  std::vector<std::vector<double>> points;
  for (const auto& v : vectors) points.emplace_back(v.values.begin(), v.values.end());
  fusion::TsneOptions o = tsne_options_;
  o.out_dim = 2;
  o.seed = seed;
  if (points.size() >= 4) o.perplexity = fusion::effective_perplexity(tsne_options_.perplexity, points.size());
  const auto p = fusion::tsne(points, o);
  return versioned({{"clip_id", clip_id},
                    {"granularity", granularity},
                    {"coordinates", p.coordinates},
                    {"seed", p.seed},
                    {"perplexity", p.perplexity},
                    {"requested_perplexity", tsne_options_.perplexity},
                    {"initial_kl", p.initial_kl},
                    {"final_kl", p.final_kl},
                    {"iterations", p.iterations}});
}

json Engine::create_record(const json& payload) {
  if (!payload.is_object()) throw Error(ErrorCode::kValidation, "record payload must be an object");
  const auto category = payload.value("category", std::string());
  if (category != "Highlight" && category != "Drawback")
    throw Error(ErrorCode::kValidation, "category must be Highlight or Drawback");
  const auto target = payload.value("target", std::string());
  if (!model::target_from_name(target)) throw Error(ErrorCode::kValidation, "unknown target '" + target + "'");
  const auto clip_id = payload.value("clip_id", std::string());
  ClipRef ref;
  try {
    ref = clip(clip_id);
  } catch (const Error&) {
    throw Error(ErrorCode::kValidation, "unknown clip '" + clip_id + "'");
  }
  const int granularity = payload.value("granularity", 1);
  if (granularity != 1 && granularity != 5) throw Error(ErrorCode::kValidation, "granularity must be 1 or 5");
  const auto grid = fusion::build_grid(ref.clip, granularity);
  if (!payload.contains("segments") || !payload["segments"].is_array() || payload["segments"].empty())
    throw Error(ErrorCode::kValidation, "segments must be a non-empty array of indices");
  std::set<std::size_t> chosen;
  for (const auto& s : payload["segments"]) {
    if (!s.is_number_integer() || s.get<long long>() < 0 ||
        static_cast<std::size_t>(s.get<long long>()) >= grid.segments.size())
      throw Error(ErrorCode::kValidation, "segment index " + s.dump() + " is outside the clip's " +
                                              std::to_string(grid.segments.size()) + "-segment grid");
    chosen.insert(static_cast<std::size_t>(s.get<long long>()));
  }
  std::vector<corpus::TimeSpan> spans;
  for (auto s : chosen) spans.push_back(grid.segments[s]);
  const auto f = features(ref.clip.session_id);
  const auto agg = fusion::aggregate_union(*f.features, spans, ref.corpus->manifest.start_ts);
  json record = {{"category", category},
                 {"target", target},
                 {"clip_id", clip_id},
                 {"granularity", granularity},
                 {"segments", std::vector<std::size_t>(chosen.begin(), chosen.end())},
                 {"glyph", glyph_json(agg)},
                 {"created_ts", payload.value("created_ts", static_cast<long long>(std::time(nullptr)))}};
  if (payload.contains("note") && payload["note"].is_string()) record["note"] = payload["note"];
  return versioned({{"record", records_->create(record)}});
}

json Engine::records_json() const { return versioned({{"records", records_->list()}}); }

void Engine::delete_record(const std::string& record_id) { records_->remove(record_id); }

json Engine::export_records_json() const {
  return versioned({{"format", "retrolens.records"}, {"records", records_->list()}});
}

json Engine::report_json(const std::string& clip_id, std::uint64_t seed) const {
  auto ref = clip(clip_id);
  auto attempt = [](auto&& produce) -> json {
    try {
      return produce();
    } catch (const Error& e) {
      return versioned({{"error", {{"code", std::string(error_code_name(e.code()))}, {"message", e.detail()}}}});
    }
  };
  json runs = json::object(), attributions = json::object();
  for (auto name : model::kTargetNames) {
    const std::string target(name);
    const auto r = run(clip_id, target, seed);
    json run_doc = r->to_json();
    run_doc["status"] = "done";
    runs[target] = versioned(run_doc);
    json levels = json::object();
    for (const char* level : {"channel", "merchandise", "feature", "segment"})
      levels[level] = attributions_json(r->run_id, level, 1, "all");
    attributions[target] = levels;
  }
  json segments = json::object(), projection = json::object();
  for (int g : {1, 5}) {
    segments[std::to_string(g)] = clip_segments_json(clip_id, g);
    projection[std::to_string(g)] = attempt([&] { return projection_json(clip_id, g, seed); });
  }
  return versioned({{"format", "retrolens.report"},
                    {"clip_id", clip_id},
                    {"seed", seed},
                    {"sessions", sessions_json()},
                    {"session", session_json(ref.clip.session_id)},
                    {"clips", session_clips_json(ref.clip.session_id)},
                    {"segments", segments},
                    {"features", clip_features_json(clip_id, "all")},
                    {"comments", comments_summary_json(clip_id, 1)},
                    {"projection", projection},
                    {"model_runs", runs},
                    {"attributions", attributions},
                    {"records", export_records_json()}});
}

}  // namespace retrolens::service
