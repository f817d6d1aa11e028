/*
 * Copyright 2026 The UP-AR Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "upar/service.hpp"

#include "httplib.h"
#include "upar/error.hpp"

namespace upar {

using nlohmann::json;

struct Service::Server {
  httplib::Server http;
};

namespace {

Response reply(int status, const json& body) { return {status, body.dump()}; }

Response error(int status, const std::string& message) {
  return reply(status, json{{"error", message}});
}

struct BadProfile {
  std::vector<Violation> violations;
  std::size_t index = 0;
};

PreferenceProfile checked_profile(const json& j, const DatasetSchema& schema, std::size_t index) {
  auto profile = profile_from_json(j.is_null() ? json::object() : j, schema);
  auto v = validate(profile, schema);
  if (!v.empty()) throw BadProfile{std::move(v), index};
  return profile;
}

std::uint64_t request_seed(const json& req) {
  if (!req.contains("seed")) return 0;
  const auto& s = req.at("seed");
  if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
    throw InvalidArgument("seed: expected a non-negative integer");
  }
  return s.get<std::uint64_t>();
}

}  // namespace

Service::Service(std::shared_ptr<const Session> session) : session_(std::move(session)) {
  if (!session_ || !session_->model) throw InvalidArgument("service: session is not loaded");
}

Response Service::recourse(const json& req) const {
  const auto& schema = session_->schema;
  if (!req.contains("instance")) throw InvalidArgument("missing 'instance'");
  const auto x = instance_from_json(req.at("instance"), schema);
  const auto profile = checked_profile(req.value("preferences", json()), schema, 0);
  const auto method = req.value("method", std::string("upar"));
  const bool trace = req.value("trace", true);
  const auto result = run_method(*session_, method, x, profile, request_seed(req));
  return reply(200, recourse_response(*session_, x, profile, result, trace));
}

Response Service::whatif(const json& req) const {
  const auto& schema = session_->schema;
  if (!req.contains("instance")) throw InvalidArgument("missing 'instance'");
  if (!req.contains("profiles") || !req.at("profiles").is_array() || req.at("profiles").empty()) {
    throw InvalidArgument("'profiles' must be a non-empty array");
  }
  const auto x = instance_from_json(req.at("instance"), schema);
  std::vector<PreferenceProfile> profiles;
  for (std::size_t k = 0; k < req.at("profiles").size(); ++k) {
    profiles.push_back(checked_profile(req.at("profiles")[k], schema, k));
  }
  const auto method = req.value("method", std::string("upar"));
  const bool trace = req.value("trace", false);
  const auto seed = request_seed(req);
  json results = json::array();
  for (const auto& p : profiles) {
    const auto result = run_method(*session_, method, x, p, seed);
    results.push_back(recourse_response(*session_, x, p, result, trace));
  }
  return reply(200, json{{"results", std::move(results)}});
}

Response Service::handle(const std::string& method, const std::string& path,
                         const std::string& body) const {
  const bool get = method == "GET";
  const bool post = method == "POST";
  try {
    if (path == "/api/schema") {
      if (!get) return error(405, "use GET");
      return reply(200, schema_to_json(session_->schema));
    }
    if (path == "/api/defaults") {
      if (!get) return error(405, "use GET");
      return reply(200, profile_to_json(default_profile(session_->schema)));
    }
    if (path != "/api/validate" && path != "/api/recourse" && path != "/api/whatif") {
      return error(404, "no route " + path);
    }
    if (!post) return error(405, "use POST");
    json req;
    try {
      req = json::parse(body);
    } catch (const json::parse_error& e) {
      return error(400, std::string("malformed JSON: ") + e.what());
    }
    if (!req.is_object()) return error(400, "request body must be a JSON object");
    if (path == "/api/validate") {
      const auto& pj = req.contains("preferences") ? req.at("preferences") : req;
      const auto v = validate(profile_from_json(pj, session_->schema), session_->schema);
      return reply(200, json{{"valid", v.empty()}, {"violations", violations_to_json(v)}});
    }
    return path == "/api/recourse" ? recourse(req) : whatif(req);
  } catch (const BadProfile& b) {
    return reply(400, json{{"error", "invalid preferences"},
                           {"profile_index", b.index},
                           {"violations", violations_to_json(b.violations)}});
  } catch (const PreconditionError& e) {
    return error(422, e.what());
  } catch (const InvalidArgument& e) {
    return error(400, e.what());
  } catch (const json::exception& e) {
    return error(400, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

int Service::bind(const std::string& host, int port, const std::string& static_dir) {
  server_ = std::make_shared<Server>();
  auto& http = server_->http;
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  for (const char* p : {"/api/schema", "/api/defaults"}) http.Get(p, route);
  for (const char* p : {"/api/validate", "/api/recourse", "/api/whatif"}) http.Post(p, route);
  if (!static_dir.empty() && !http.set_mount_point("/", static_dir)) {
    throw IoError("static directory not found: " + static_dir);
  }
  const int bound = port == 0 ? http.bind_to_any_port(host) : (http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Service::listen() {
  if (!server_) throw PreconditionError("service: bind() first");
  server_->http.listen_after_bind();
}

void Service::wait_until_ready() const {
  if (server_) server_->http.wait_until_ready();
}

void Service::stop() {
  if (server_) server_->http.stop();
}

}  // namespace upar
