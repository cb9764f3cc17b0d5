// Copyright 2026 The dogvc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Before httplib: <resolv.h> defines a `_res` macro that breaks Eigen.
#include "dogvc/listen.hpp"

#include <httplib.h>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace dogvc::listen {

using nlohmann::json;

struct HttpServer::Impl {
  ListeningService& service;
  httplib::Server server;
  explicit Impl(ListeningService& s) : service(s) {}
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, json{{"error", message}});
}

json parse_body(const httplib::Request& req) {
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ServiceError(400, "request body must be a JSON object");
  return j;
}

std::string string_field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end() || !it->is_string()) throw ServiceError(400, std::string("missing string field '") + name + "'");
  return it->get<std::string>();
}

// Wraps a handler so service errors become status codes. Internal error text
// is logged, never returned, since it may name files or conditions.
template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e.status(), e.status() == 500 ? "internal error" : e.what());
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send_error(res, 500, "internal error");
    }
  };
}

}  // namespace

HttpServer::HttpServer(ListeningService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svc = impl_->service;
  auto& srv = impl_->server;

  srv.Post("/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             std::uint64_t seed = 0;
             if (const auto it = body.find("seed"); it != body.end()) {
               if (!it->is_number_unsigned()) throw ServiceError(400, "seed must be a non-negative integer");
               seed = it->get<std::uint64_t>();
             }
             const Session s = svc.create_session(string_field(body, "rater"), string_field(body, "experiment"), seed);
             json playlist = json::array();
             for (const auto& e : s.playlist) playlist.push_back({{"token", e.token}, {"text", e.text}});
             send_json(res, 201, json{{"session", s.id}, {"playlist", playlist}});
           }));

  srv.Get(R"(/clips/([0-9a-f]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            res.set_content(svc.clip_bytes(req.matches[1]), "audio/wav");
            res.set_header("Cache-Control", "no-store");
            res.status = 200;
          }));
  // Anything else under /clips is a forged token.
  srv.Get(R"(/clips/.*)", [](const httplib::Request&, httplib::Response& res) {
    send_error(res, 403, "unknown clip token");
  });

  srv.Post("/ratings", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             const auto score = body.find("score");
             if (score == body.end() || !score->is_number_integer()) {
               throw ServiceError(422, "score must be an integer from 1 to 5");
             }
             svc.submit_rating(string_field(body, "session"), string_field(body, "token"),
                               string_field(body, "scale"), score->get<int>());
             send_json(res, 200, json{{"ok", true}});
           }));

  srv.Post("/transcripts", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             svc.submit_transcript(string_field(body, "session"), string_field(body, "token"),
                                   string_field(body, "text"));
             send_json(res, 200, json{{"ok", true}});
           }));

  srv.Get(R"(/experiments/([^/]+)/results)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            res.set_content(svc.results(req.matches[1]).to_json(), "application/json");
            res.status = 200;
          }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p < 0) throw Error("cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port)) throw Error(fmt::format("cannot bind {}:{}", host, port));
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace dogvc::listen
