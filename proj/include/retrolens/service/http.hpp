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

#include <map>
#include <memory>
#include <string>

#include "retrolens/service/engine.hpp"

namespace retrolens::service {

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  std::string if_none_match;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string etag;
  std::string content_type = "application/json";
};

// Route table shared by the socket server and in-process tests.
HttpResponse handle_request(Engine& engine, const HttpRequest& request);

// HTTP status for an engine error code.
int status_for(ErrorCode code);

class HttpServer {
 public:
  explicit HttpServer(Engine& engine);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port; port 0 picks a free one. Throws BindFailure.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace retrolens::service
