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

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "retrolens/corpus/io.hpp"
#include "retrolens/corpus/synth.hpp"
#include "retrolens/error.hpp"
#include "retrolens/model/metrics.hpp"
#include "retrolens/model/target.hpp"
#include "retrolens/numeric.hpp"
#include "retrolens/service/engine.hpp"
#include "retrolens/service/http.hpp"
#include "retrolens/text/synth.hpp"

namespace fs = std::filesystem;
using namespace retrolens;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string corpus_root;
  std::string config_path;
  std::uint64_t seed = 7;
  bool seed_given = false;
};

Config load_config(const Common& c) { return c.config_path.empty() ? Config{} : Config::load(c.config_path); }

service::Engine open_engine(const Common& c, bool eager) {
  auto root = service::resolve_corpus_root(c.corpus_root);
  if (!root) throw UsageError("no corpus root: pass --corpus-root or set RETROLENS_CORPUS");
  return service::Engine({*root, load_config(c), eager});
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

service::HttpServer* g_server = nullptr;
extern "C" void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RetroLens: multi-modal retrospective analytics for live-streaming sales"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--corpus-root", common.corpus_root, "Directory holding one sub-directory per session");
  app.add_option("--config", common.config_path, "key=value configuration file");
  app.add_option("--seed", common.seed, "Random seed")->each([&](const std::string&) { common.seed_given = true; });

  std::string session_dir;
  auto* ingest = app.add_subcommand("ingest-check", "Load and validate one session directory");
  ingest->add_option("session-dir", session_dir)->required();

  auto* extract = app.add_subcommand("extract", "Compute and cache per-second features for a session");
  extract->add_option("session-dir", session_dir)->required();

  std::string clip_id, target = "gpm", out_path;
  auto* model_cmd = app.add_subcommand("model", "Fit the four model families for one clip and target");
  model_cmd->add_option("clip", clip_id)->required();
  model_cmd->add_option("--target", target, "One of the nine target options");

  auto* report = app.add_subcommand("report", "Write a static JSON bundle of every clip view");
  report->add_option("clip", clip_id)->required();
  report->add_option("--out", out_path, "Output file (default: stdout)");

  std::string host = "127.0.0.1";
  int port = -1;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--port", port, "Listen port (0 picks a free port)");
  serve->add_option("--host", host, "Listen address");

  corpus::SynthOptions synth_opts;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic session with known ground truth");
  synth->add_option("--out", synth_out, "Corpus root; the session lands in <out>/synth-<seed>")->required();
  synth->add_option("--minutes", synth_opts.minutes)->check(CLI::Range(5, 100000));
  synth->add_option("--batches", synth_opts.batches)->check(CLI::PositiveNumber);
  synth->add_option("--media-minutes", synth_opts.media_minutes, "Minutes with audio/frames (-1 = all)");

  std::size_t per_category = 100;
  auto* pitch = app.add_subcommand("pitch-corpus", "Write the labeled pitch-sentence corpus as JSON lines");
  pitch->add_option("--out", out_path)->required();
  pitch->add_option("--per-category", per_category)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ingest) {
      const auto c = corpus::load_session(session_dir);
      const auto& m = c->manifest;
      std::cout << "session " << m.session_id << " ok: " << (m.end_ts - m.start_ts) << " s, " << c->stats.size()
                << " stats rows, " << c->transcript.size() << " sentences, " << c->frames.size() << " frames, "
                << c->comments.size() << " comments, " << m.merchandise.size() << " merchandise, " << c->audio.duration_seconds() << " s audio\n"
                << "source hash " << hex64(c->source_hash) << "\n";
      for (const auto& clip : corpus::segment_clips(*c))
        std::cout << "clip " << clip.clip_id << " [" << clip.span.start << ", " << clip.span.end << ")\n";
    } else if (*extract) {
      const fs::path dir = fs::absolute(session_dir).lexically_normal();
      const auto manifest = corpus::load_session(dir)->manifest;
      Common c = common;
      if (c.corpus_root.empty()) c.corpus_root = dir.parent_path().string();
      auto engine = open_engine(c, false);
      const auto r = engine.features(manifest.session_id);
      std::cout << "session " << manifest.session_id << ": cache " << (r.cache_hit ? "hit" : "miss") << "\n"
                << "features " << r.path.string() << "\n"
                << "content hash " << hex64(fnv1a(r.features->to_json().dump())) << "\n"
                << "media seconds " << r.features->media_seconds << "\n";
    } else if (*model_cmd) {
      auto engine = open_engine(common, false);
      const auto run = engine.run(clip_id, target, common.seed_given ? common.seed : engine.default_seed());
      std::cout << "run " << run->run_id << "  clip " << run->clip_id << "  target " << run->target << "  train "
                << run->train_rows << "  test " << run->test_rows << (run->mae_only ? "  (MAE only)" : "") << "\n";
      std::printf("  %-18s %14s %10s %10s\n", "family", "MAE", "MAPE%", "composite");
      for (const auto& r : run->reports) {
        const std::string mape = r.mape ? fmt("%.4f", *r.mape * 100.0) : "n/a";
        std::printf("%s %-18s %14.6f %10s %10.4f\n", r.family == run->winner ? "*" : " ",
                    std::string(model::family_name(r.family)).c_str(), r.mae, mape.c_str(), r.composite);
      }
      std::cout << "winner " << model::family_name(run->winner) << "  attribution " << run->shap_method << "\n";
    } else if (*report) {
      auto engine = open_engine(common, false);
      const auto doc = engine.report_json(clip_id, common.seed_given ? common.seed : engine.default_seed());
      if (out_path.empty())
        std::cout << doc.dump(1) << "\n";
      else
        write_file(out_path, doc.dump(1) + "\n");
    } else if (*serve) {
      auto engine = open_engine(common, true);
      if (port < 0) port = static_cast<int>(engine.config().get_int("server.port", 8765));
      if (host == "127.0.0.1") host = engine.config().get_string("server.host", host);
      service::HttpServer server(engine);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      server.serve();
      g_server = nullptr;
    } else if (*synth) {
      if (common.seed_given) synth_opts.seed = common.seed;
      const auto manifest =
          corpus::synth_corpus(synth_opts, fs::path(synth_out) / ("synth-" + std::to_string(synth_opts.seed)));
      std::cout << manifest.string() << "\n";
    } else if (*pitch) {
      write_file(out_path, text::write_labeled_jsonl(text::generate_labeled_corpus(common.seed, per_category)));
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
