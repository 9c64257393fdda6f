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

#include <gtest/gtest.h>

#include <array>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "httplib.h"
#include "retrolens/error.hpp"
#include "retrolens/model/target.hpp"
#include "retrolens/service/engine.hpp"
#include "retrolens/service/http.hpp"
#include "retrolens/service/jobs.hpp"
#include "retrolens/service/records.hpp"
#include "support.hpp"

using namespace retrolens;
using namespace retrolens::service;
using nlohmann::json;
namespace fs = std::filesystem;
namespace rt = retrolens::testing;

namespace {

constexpr const char* kClip = "synth-7_b0";

// Engine over the shared synth corpus with a private record log.
Engine shared_engine(const std::string& label) {
  Config c;
  c.set("server.records_path", (rt::fresh_dir(label) / "records.jsonl").string());
  return Engine({rt::shared_synth_root(), c, false});
}

HttpResponse call(Engine& e, const std::string& method, const std::string& path,
                  std::map<std::string, std::string> query = {}, std::string body = {}, std::string etag = {}) {
  return handle_request(e, {method, path, std::move(query), std::move(body), std::move(etag)});
}

json body_of(const HttpResponse& r) { return json::parse(r.body); }

std::string error_code_of(const HttpResponse& r) { return body_of(r)["error"]["code"].get<std::string>(); }

json record_payload(std::vector<int> segments, int granularity = 5) {
  return {{"category", "Highlight"}, {"target", "gpm"}, {"clip_id", kClip}, {"granularity", granularity},
          {"segments", segments}, {"note", "warm-up pitch"}, {"created_ts", 1704070000}};
}

json wait_for_run(Engine& e, const std::string& run_id) {
  for (int i = 0; i < 600; ++i) {
    const auto r = call(e, "GET", "/modelruns/" + run_id);
    const auto b = body_of(r);
    if (b["status"] == "done" || b["status"] == "failed") return b;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  return json();
}

struct CliResult {
  int status = -1;
  std::string out;
};

CliResult cli(const std::string& args) {
  const std::string cmd = std::string(RETROLENS_CLI) + " " + args + " 2>&1";
  CliResult r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p) != nullptr) r.out += buf.data();
  const int raw = ::pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

}  // namespace

TEST(Records, CreateListDeleteAndNoIdReuse) {
  const auto path = rt::fresh_dir("records") / "log.jsonl";
  RecordStore s(path);
  const auto a = s.create({{"category", "Highlight"}});
  const auto b = s.create({{"category", "Drawback"}});
  EXPECT_EQ(a["record_id"], "rec-000001");
  EXPECT_EQ(b["record_id"], "rec-000002");
  ASSERT_EQ(s.list().size(), 2u);
  s.remove("rec-000002");
  ASSERT_EQ(s.list().size(), 1u);
  EXPECT_EQ(s.list()[0], a);
  try {
    s.remove("rec-000002");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownRecord);
  }
  EXPECT_EQ(s.create({{"category", "Highlight"}})["record_id"], "rec-000003");
  RecordStore reopened(path);
  EXPECT_EQ(reopened.create({})["record_id"], "rec-000004");
}

TEST(Records, SurviveRestartByteExactly) {
  const auto path = rt::fresh_dir("records") / "log.jsonl";
  std::vector<std::string> before;
  {
    RecordStore s(path);
    s.create({{"note", "unicode ✓ and \"quotes\""}, {"glyph", {{"x", 0.1 + 0.2}}}});
    s.create({{"segments", {1, 2, 3}}});
    for (const auto& r : s.list()) before.push_back(r.dump());
  }
  const auto bytes = rt::read_file(path);
  RecordStore again(path);
  std::vector<std::string> after;
  for (const auto& r : again.list()) after.push_back(r.dump());
  EXPECT_EQ(after, before);
  EXPECT_EQ(rt::read_file(path), bytes);  // loading without deletes leaves the log untouched
}

TEST(Records, LogCompactsAfterManyDeletes) {
  const auto path = rt::fresh_dir("records") / "log.jsonl";
  RecordStore s(path);
  for (int i = 0; i < 20; ++i) s.create({{"i", i}});
  for (int i = 1; i <= 18; ++i) s.remove("rec-" + std::string(6 - std::to_string(i).size(), '0') + std::to_string(i));
  EXPECT_LE(s.log_lines(), 2 * s.list().size() + 9);
  RecordStore again(path);
  ASSERT_EQ(again.list().size(), 2u);
  EXPECT_EQ(again.list()[0]["i"], 18);
  EXPECT_EQ(again.create({})["record_id"], "rec-000021");
}

TEST(Records, CorruptLogIsASchemaError) {
  const auto path = rt::fresh_dir("records") / "log.jsonl";
  rt::write_file(path, "{\"op\":\"create\",\"record\":{}}\nnot json\n");
  try {
    RecordStore s(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaViolation);
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
}

TEST(Jobs, SubmitIsIdempotentAndFailuresAreReported) {
  JobQueue q(2);
  std::atomic<int> ran{0};
  EXPECT_TRUE(q.submit("a", [&] { ++ran; }));
  EXPECT_FALSE(q.submit("a", [&] { ++ran; }));
  ASSERT_TRUE(q.wait("a"));
  EXPECT_EQ(ran.load(), 1);
  EXPECT_EQ(q.status("a")->state, JobState::kDone);
  EXPECT_TRUE(q.submit("b", [] { throw Error(ErrorCode::kTooFewRows, "short"); }));
  q.wait("b");
  const auto b = q.status("b");
  EXPECT_EQ(b->state, JobState::kFailed);
  EXPECT_EQ(b->error_code, "TooFewRows");
  q.forget_failed("b");
  EXPECT_FALSE(q.status("b"));
  q.forget_failed("a");  // finished jobs stay
  EXPECT_TRUE(q.status("a"));
  EXPECT_FALSE(q.wait("missing"));
}

TEST(EngineTest, FeatureCacheHitsAndInvalidatesOnSourceChange) {
  const auto root = rt::copy_of_synth_root({}, "engine-cache");
  std::string first;
  {
    Engine e({root, Config{}, false});
    const auto r = e.features("synth-7");
    EXPECT_FALSE(r.cache_hit);
    first = r.features->to_json().dump();
  }
  {
    Engine e({root, Config{}, false});
    const auto r = e.features("synth-7");
    EXPECT_TRUE(r.cache_hit);
    EXPECT_EQ(r.features->to_json().dump(), first);
  }
  // Any byte of any source file changes the key.
  const auto comments = root / "synth-7" / "comments.jsonl";
  auto text = rt::read_file(comments);
  const auto pos = text.find("\"text\":\"");
  ASSERT_NE(pos, std::string::npos);
  text.insert(pos + 8, "really ");
  rt::write_file(comments, text);
  Engine e({root, Config{}, false});
  EXPECT_FALSE(e.features("synth-7").cache_hit);
}

TEST(EngineTest, RunsAreCachedAcrossRestarts) {
  const auto root = rt::copy_of_synth_root({}, "engine-runs");
  std::string run_id, doc;
  {
    Engine e({root, Config{}, false});
    const auto run = e.run(kClip, "likes", 7);
    run_id = run->run_id;
    doc = run->to_json().dump();
    EXPECT_EQ(e.run(kClip, "likes", 7).get(), run.get());
  }
  Engine e({root, Config{}, false});
  EXPECT_TRUE(fs::exists(e.cache_dir() / "runs" / (run_id + ".json")));
  const auto again = e.run(kClip, "likes", 7);
  EXPECT_EQ(again->run_id, run_id);
  EXPECT_EQ(again->to_json().dump(), doc);
  EXPECT_EQ(e.run_json(run_id)["status"], "done");
}

TEST(EngineTest, BadConfigAndMissingRootsFailFast) {
  Config c;
  c.set("model.tree_shap", "exact");
  EXPECT_THROW(Engine({rt::shared_synth_root(), c, false}), Error);
  const auto bad = rt::fresh_dir("bad-root");
  fs::create_directories(bad / "broken");
  rt::write_file(bad / "broken" / "manifest.json", "{\"session_id\": 3}");
  try {
    Engine e({bad, Config{}, true});
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::kCorpusLoadError || e.code() == ErrorCode::kSchemaViolation) << e.what();
  }
}

TEST(EngineTest, ResolveCorpusRootPrefersExplicitThenEnvironment) {
  EXPECT_EQ(resolve_corpus_root("/some/where"), fs::path("/some/where"));
  ::setenv("RETROLENS_CORPUS", "/from/env", 1);
  EXPECT_EQ(resolve_corpus_root(""), fs::path("/from/env"));
  ::unsetenv("RETROLENS_CORPUS");
}

TEST(HttpRoutes, SessionsAndClips) {
  auto e = shared_engine("http");
  const auto s = call(e, "GET", "/sessions");
  ASSERT_EQ(s.status, 200);
  const auto sessions = body_of(s);
  EXPECT_EQ(sessions["version"], 1);
  ASSERT_EQ(sessions["sessions"].size(), 1u);
  const auto& summary = sessions["sessions"][0];
  double sales = 0.0;
  for (const auto& m : summary["merchandise"]) sales += m["sales"].get<double>();
  EXPECT_NEAR(summary["gmv"].get<double>(), sales, 1e-6);
  EXPECT_EQ(body_of(call(e, "GET", "/sessions/synth-7"))["session_id"], "synth-7");
  EXPECT_EQ(body_of(call(e, "GET", "/sessions/synth-7/clips"))["clips"][0]["clip_id"], kClip);
  const auto seg = body_of(call(e, "GET", std::string("/clips/") + kClip + "/segments", {{"granularity", "5"}}));
  EXPECT_EQ(seg["segments"].size(), 6u);
  EXPECT_EQ(seg["segments"][0]["vector"].size(), 25u);
  EXPECT_EQ(call(e, "GET", std::string("/clips/") + kClip + "/features", {{"channel", "audio"}}).status, 200);
  EXPECT_EQ(call(e, "GET", std::string("/clips/") + kClip + "/comments/summary").status, 200);
  EXPECT_EQ(call(e, "GET", std::string("/clips/") + kClip + "/projection").status, 200);
}

TEST(HttpRoutes, ErrorsCarryMachineReadableCodes) {
  auto e = shared_engine("http");
  auto r = call(e, "GET", "/clips/nope_b0/segments");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(error_code_of(r), "UnknownClip");
  r = call(e, "GET", "/sessions/nope");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(error_code_of(r), "UnknownSession");
  r = call(e, "GET", "/modelruns/run-0000000000000000");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(error_code_of(r), "UnknownRun");
  r = call(e, "GET", "/nowhere");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(error_code_of(r), "NotFound");
  r = call(e, "POST", "/clips/nope_b0/modelruns", {}, R"({"target":"gpm"})");
  EXPECT_EQ(r.status, 404);
  r = call(e, "POST", std::string("/clips/") + kClip + "/modelruns", {}, R"({"target":"velocity"})");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(error_code_of(r), "UnknownTarget");
  r = call(e, "POST", std::string("/clips/") + kClip + "/modelruns", {}, "{not json");
  EXPECT_EQ(r.status, 400);
  r = call(e, "GET", std::string("/clips/") + kClip + "/segments", {{"granularity", "3"}});
  EXPECT_EQ(r.status, 400);
  r = call(e, "GET", std::string("/clips/") + kClip + "/segments", {{"granularity", "five"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(status_for(ErrorCode::kTooFewPoints), 422);
  EXPECT_EQ(status_for(ErrorCode::kIoError), 500);
}

TEST(HttpRoutes, EtagsAreContentHashes) {
  auto e = shared_engine("http");
  const auto a = call(e, "GET", "/sessions");
  const auto b = call(e, "GET", "/sessions");
  ASSERT_FALSE(a.etag.empty());
  EXPECT_EQ(a.etag, b.etag);
  EXPECT_EQ(a.body, b.body);
  EXPECT_EQ(a.etag, "\"" + hex64(fnv1a(a.body)) + "\"");
  const auto c = call(e, "GET", "/sessions", {}, {}, a.etag);
  EXPECT_EQ(c.status, 304);
  EXPECT_TRUE(c.body.empty());
  EXPECT_EQ(call(e, "GET", "/sessions", {}, {}, "\"stale\"").status, 200);
}

TEST(HttpRoutes, ModelRunLifecycleAndAttributionLevels) {
  auto e = shared_engine("http");
  const auto path = std::string("/clips/") + kClip + "/modelruns";
  const auto first = call(e, "POST", path, {}, R"({"target":"gpm","seed":7})");
  ASSERT_EQ(first.status, 202);
  const auto run_id = body_of(first)["run_id"].get<std::string>();
  const auto second = call(e, "POST", path, {}, R"({"target":"gpm","seed":7})");
  EXPECT_EQ(body_of(second)["run_id"], run_id);
  EXPECT_EQ(run_id, model::make_run_id(kClip, "gpm", 7));
  const auto done = wait_for_run(e, run_id);
  ASSERT_EQ(done["status"], "done");
  ASSERT_EQ(done["models"].size(), 4u);
  EXPECT_EQ(done["run_id"], run_id);
  for (const auto* level : {"channel", "merchandise", "feature", "segment"}) {
    for (const auto* g : {"1", "5"}) {
      const auto r = call(e, "GET", "/modelruns/" + run_id + "/attributions", {{"level", level}, {"granularity", g}});
      EXPECT_EQ(r.status, 200) << level << " " << r.body.substr(0, 200);
    }
  }
  const auto seg = body_of(call(e, "GET", "/modelruns/" + run_id + "/attributions", {{"level", "channel"}}));
  ASSERT_EQ(seg["segments"].size(), 30u);
  EXPECT_EQ(call(e, "GET", "/modelruns/" + run_id + "/attributions", {{"level", "galaxy"}}).status, 400);
}

TEST(HttpRoutes, RecordsCrudAndExport) {
  auto e = shared_engine("http");
  auto r = call(e, "POST", "/records", {}, record_payload({0, 1}).dump());
  ASSERT_EQ(r.status, 201) << r.body;
  const auto id = body_of(r)["record"]["record_id"].get<std::string>();
  EXPECT_EQ(call(e, "POST", "/records", {}, record_payload({2}).dump()).status, 201);
  auto list = body_of(call(e, "GET", "/records"));
  EXPECT_EQ(list["records"].size(), 2u);
  const auto exported = body_of(call(e, "GET", "/records/export"));
  EXPECT_EQ(exported["format"], "retrolens.records");
  ASSERT_EQ(exported["records"].size(), 2u);
  EXPECT_TRUE(exported["records"][0].contains("glyph"));
  r = call(e, "POST", "/records", {}, record_payload({6}).dump());
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(error_code_of(r), "ValidationError");
  EXPECT_NE(body_of(r)["error"]["message"].get<std::string>().find("segment index 6"), std::string::npos);
  auto bad = record_payload({0});
  bad["category"] = "Meh";
  EXPECT_EQ(call(e, "POST", "/records", {}, bad.dump()).status, 400);
  EXPECT_EQ(call(e, "DELETE", "/records/" + id).status, 200);
  EXPECT_EQ(call(e, "DELETE", "/records", {{"id", id}}).status, 404);
  list = body_of(call(e, "GET", "/records"));
  ASSERT_EQ(list["records"].size(), 1u);
  EXPECT_NE(list["records"][0]["record_id"], id);
}

TEST(HttpServerTest, ServesOverARealSocket) {
  auto e = shared_engine("socket");
  HttpServer server(e);
  const int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread t([&] { server.serve(); });
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(5);
  const auto res = client.Get("/sessions");
  auto missing = client.Get("/clips/nope_b0/segments");
  server.stop();
  t.join();
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_FALSE(res->get_header_value("ETag").empty());
  EXPECT_EQ(json::parse(res->body)["sessions"].size(), 1u);
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
}

TEST(HttpServerTest, TakenPortIsABindFailure) {
  auto e = shared_engine("socket");
  HttpServer a(e), b(e);
  const int port = a.bind("127.0.0.1", 0);
  try {
    b.bind("127.0.0.1", port);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kBindFailure);
  }
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("").status, 2);
  EXPECT_EQ(cli("--no-such-flag").status, 2);
  EXPECT_EQ(cli("ingest-check /definitely/not/here").status, 3);
  const auto ok = cli("ingest-check " + (rt::shared_synth_root() / "synth-7").string());
  EXPECT_EQ(ok.status, 0) << ok.out;
}

TEST(Cli, ExtractTwiceHitsTheCache) {
  const auto root = rt::copy_of_synth_root({}, "cli-extract");
  const auto dir = (root / "synth-7").string();
  const auto a = cli("extract " + dir);
  const auto b = cli("extract " + dir);
  ASSERT_EQ(a.status, 0) << a.out;
  ASSERT_EQ(b.status, 0) << b.out;
  EXPECT_NE(a.out.find("cache miss"), std::string::npos) << a.out;
  EXPECT_NE(b.out.find("cache hit"), std::string::npos) << b.out;
  // Identical outputs apart from the hit/miss word.
  auto strip = [](std::string s) {
    for (const auto* w : {"cache miss", "cache hit"})
      if (auto p = s.find(w); p != std::string::npos) s.erase(p, std::string(w).size());
    return s;
  };
  EXPECT_EQ(strip(a.out), strip(b.out));
}

TEST(Cli, ModelMarksTheWinner) {
  const auto r = cli("--corpus-root " + rt::shared_synth_root().string() + " model " + kClip + " --target gpm");
  ASSERT_EQ(r.status, 0) << r.out;
  for (auto f : {"linear", "random_forest", "gradient_boosting", "perceptron"}) EXPECT_NE(r.out.find(f), std::string::npos);
  EXPECT_NE(r.out.find('*'), std::string::npos);
  EXPECT_EQ(cli("--corpus-root " + rt::shared_synth_root().string() + " model " + kClip + " --target velocity").status, 3);
}

TEST(ConfigTest, SectionsQuotesAndComments) {
  const auto c = Config::parse(
      "seed = 9  # default seed\n"
      "[server]\n"
      "port = 9000\n"
      "cache_dir = \"/tmp/a#b\"\n"
      "\n"
      "[model]\n"
      "lag_target = false\n");
  EXPECT_EQ(c.get_int("seed", 0), 9);
  EXPECT_EQ(c.get_int("server.port", 0), 9000);
  EXPECT_EQ(c.get_string("server.cache_dir", ""), "/tmp/a#b");
  EXPECT_FALSE(c.get_bool("model.lag_target", true));
  EXPECT_EQ(c.get_double("tsne.perplexity", 10.0), 10.0);
}

TEST(ConfigTest, MalformedInputNamesTheLine) {
  try {
    Config::parse("a = 1\nnonsense\n", "x.toml");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaViolation);
    EXPECT_NE(std::string(e.what()).find("x.toml"), std::string::npos);
  }
  const auto c = Config::parse("n = 1.5x\n");
  EXPECT_THROW(c.get_double("n", 0), Error);
  EXPECT_THROW(c.get_int("n", 0), Error);
  EXPECT_THROW(Config::load("/no/such/config.toml"), Error);
}

TEST(ReportSchema, GeneratedReportValidatesAndTamperingIsCaught) {
  auto e = shared_engine("report");
  e.create_record(record_payload({1, 2}));
  const auto report = e.report_json(kClip, 7);
  const auto dir = rt::fresh_dir("report");
  rt::write_file(dir / "report.json", report.dump());
  auto broken = report;
  broken["model_runs"]["gpm"].erase("base_value");
  broken["segments"]["5"]["segments"][0]["vector"].push_back(0.5);
  rt::write_file(dir / "broken.json", broken.dump());
  const auto validate = [&](const std::string& file) {
    const std::string cmd = std::string(RETROLENS_PYTHON) + " " + RETROLENS_SOURCE_DIR + "/tools/validate_report.py " +
                            RETROLENS_SOURCE_DIR + "/schemas/report.schema.json " + (dir / file).string() + " > " +
                            (dir / (file + ".log")).string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(validate("report.json"), 0) << rt::read_file(dir / "report.json.log");
  EXPECT_EQ(validate("broken.json"), 1) << rt::read_file(dir / "broken.json.log");
}

TEST(HttpRoutes, ShortGridProjectionIsUnprocessable) {
  corpus::SynthOptions o;
  o.minutes = 10;
  Config c;
  c.set("server.records_path", (rt::fresh_dir("short") / "records.jsonl").string());
  Engine e({rt::shared_synth_root(o), c, false});
  const auto r = call(e, "GET", std::string("/clips/") + kClip + "/projection", {{"granularity", "5"}});
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(error_code_of(r), "TooFewPoints");
  EXPECT_EQ(call(e, "GET", std::string("/clips/") + kClip + "/projection", {{"granularity", "1"}}).status, 200);
}
