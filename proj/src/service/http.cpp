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

#include "retrolens/service/http.hpp"

#include <charconv>
#include <vector>

#include "httplib.h"
#include "retrolens/error.hpp"
#include "retrolens/numeric.hpp"

namespace retrolens::service {
namespace {

using nlohmann::json;

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(httplib::detail::decode_url(cur, false));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(httplib::detail::decode_url(cur, false));
  return parts;
}

long long int_param(const HttpRequest& req, const std::string& key, long long fallback) {
  auto it = req.query.find(key);
  if (it == req.query.end() || it->second.empty()) return fallback;
  long long v = 0;
  const auto* end = it->second.data() + it->second.size();
  auto [ptr, ec] = std::from_chars(it->second.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw Error(ErrorCode::kValidation, "query parameter '" + key + "' must be an integer");
  return v;
}

std::string str_param(const HttpRequest& req, const std::string& key, const std::string& fallback) {
  auto it = req.query.find(key);
  return it == req.query.end() ? fallback : it->second;
}

HttpResponse json_response(int status, const json& body) {
  HttpResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

HttpResponse error_response(int status, std::string_view code, const std::string& message) {
  return json_response(status, {{"version", kApiVersion}, {"error", {{"code", std::string(code)}, {"message", message}}}});
}

const json& require_object(const json& body) {
  if (!body.is_object()) throw Error(ErrorCode::kValidation, "request body must be a JSON object");
  return body;
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kValidation, std::string("malformed JSON body: ") + e.what());
  }
}

HttpResponse route(Engine& engine, const HttpRequest& req) {
  const auto p = split_path(req.path);
  const auto& m = req.method;
  const auto n = p.size();
  const bool get = m == "GET" || m == "HEAD";
  auto seed = [&] { return static_cast<std::uint64_t>(int_param(req, "seed", static_cast<long long>(engine.default_seed()))); };
  auto granularity = [&] { return static_cast<int>(int_param(req, "granularity", 1)); };

  if (n >= 1 && p[0] == "sessions") {
    if (get && n == 1) return json_response(200, engine.sessions_json());
    if (get && n == 2) return json_response(200, engine.session_json(p[1]));
    if (get && n == 3 && p[2] == "clips") return json_response(200, engine.session_clips_json(p[1]));
  } else if (n >= 3 && p[0] == "clips") {
    const auto& clip = p[1];
    if (get && n == 3 && p[2] == "segments") return json_response(200, engine.clip_segments_json(clip, granularity()));
    if (get && n == 3 && p[2] == "features")
      return json_response(200, engine.clip_features_json(clip, str_param(req, "channel", "all")));
    if (get && n == 4 && p[2] == "comments" && p[3] == "summary")
      return json_response(200, engine.comments_summary_json(clip, granularity()));
    if (get && n == 3 && p[2] == "projection")
      return json_response(200, engine.projection_json(clip, static_cast<int>(int_param(req, "granularity", 5)), seed()));
    if (m == "POST" && n == 3 && p[2] == "modelruns") {
      const json body = require_object(parse_body(req.body));
      std::string target = str_param(req, "target", "");
      if (body.contains("target")) {
        if (!body["target"].is_string()) throw Error(ErrorCode::kValidation, "target must be a string");
        target = body["target"].get<std::string>();
      }
      std::uint64_t s = seed();
      if (body.contains("seed")) {
        if (!body["seed"].is_number_unsigned()) throw Error(ErrorCode::kValidation, "seed must be a non-negative integer");
        s = body["seed"].get<std::uint64_t>();
      }
      // Clip existence is checked before the target so an unknown clip is a 404.
      engine.clip(clip);
      return json_response(202, engine.submit_run(clip, target, s));
    }
  } else if (n >= 2 && p[0] == "modelruns") {
    if (get && n == 2) return json_response(200, engine.run_json(p[1]));
    if (get && n == 3 && p[2] == "attributions")
      return json_response(200, engine.attributions_json(p[1], str_param(req, "level", "channel"), granularity(),
                                                         str_param(req, "channel", "all")));
  } else if (n >= 1 && p[0] == "records") {
    if (get && n == 1) return json_response(200, engine.records_json());
    if (get && n == 2 && p[1] == "export") return json_response(200, engine.export_records_json());
    if (m == "POST" && n == 1) return json_response(201, engine.create_record(parse_body(req.body)));
    if (m == "DELETE" && (n == 2 || (n == 1 && req.query.count("id")))) {
      const auto id = n == 2 ? p[1] : req.query.at("id");
      engine.delete_record(id);
      return json_response(200, {{"version", kApiVersion}, {"deleted", id}});
    }
  }
  return error_response(404, "NotFound", "no route for " + m + " " + req.path);
}

}  // namespace

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownClip:
    case ErrorCode::kUnknownSession:
    case ErrorCode::kUnknownRun:
    case ErrorCode::kUnknownRecord:
    case ErrorCode::kMissingFile:
      return 404;
    case ErrorCode::kValidation:
    case ErrorCode::kUnknownTarget:
    case ErrorCode::kPrecondition:
      return 400;
    case ErrorCode::kClipTooShort:
    case ErrorCode::kTooFewPoints:
    case ErrorCode::kPerplexityTooLarge:
    case ErrorCode::kTooFewRows:
    case ErrorCode::kNoShiftInClip:
    case ErrorCode::kUnmappedFeature:
    case ErrorCode::kUnsortedStream:
      return 422;
    default:
      return 500;
  }
}

HttpResponse handle_request(Engine& engine, const HttpRequest& request) {
  HttpResponse r;
  try {
    r = route(engine, request);
  } catch (const Error& e) {
    r = error_response(status_for(e.code()), error_code_name(e.code()), e.detail());
  } catch (const std::exception& e) {
    r = error_response(500, "InternalError", e.what());
  }
  if (r.status == 200 && (request.method == "GET" || request.method == "HEAD")) {
    r.etag = "\"" + hex64(fnv1a(r.body)) + "\"";
    if (!request.if_none_match.empty() && request.if_none_match == r.etag) {
      r.status = 304;
      r.body.clear();
    }
  }
  return r;
}

struct HttpServer::Impl {
  Engine& engine;
  httplib::Server server;
  explicit Impl(Engine& e) : engine(e) {}
};

HttpServer::HttpServer(Engine& engine) : impl_(std::make_unique<Impl>(engine)) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r{req.method, req.path, {}, req.body, req.get_header_value("If-None-Match")};
    for (const auto& [k, v] : req.params) r.query[k] = v;
    const auto out = handle_request(impl_->engine, r);
    res.status = out.status;
    if (!out.etag.empty()) res.set_header("ETag", out.etag);
    if (out.status != 304) res.set_content(out.body, out.content_type);
  };
  auto& s = impl_->server;
  s.Get(".*", forward);
  s.Post(".*", forward);
  s.Delete(".*", forward);
  // httplib's default also sets SO_REUSEPORT, which lets a second server share
  // a taken port silently instead of failing to bind.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  s.new_task_queue = [&engine] {
    return new httplib::ThreadPool(static_cast<std::size_t>(std::max<long long>(2, engine.config().get_int("server.threads", 4))));
  };
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& s = impl_->server;
  int bound = port;
  if (port == 0) {
    bound = s.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kBindFailure, "cannot bind " + host);
  } else if (!s.bind_to_port(host, port)) {
    throw Error(ErrorCode::kBindFailure, "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace retrolens::service
