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

#ifndef UPAR_SERVICE_HPP
#define UPAR_SERVICE_HPP

#include <memory>
#include <string>

#include "upar/session.hpp"

namespace upar {

struct Response {
  int status = 200;
  std::string body;  // JSON
};

// Request routing without any transport. Safe to call concurrently: the
// session is read-only and every request draws from its own seeded stream.
//
//   GET  /api/schema    feature specs
//   GET  /api/defaults  default preference profile
//   POST /api/validate  {"preferences"} or a bare profile -> violations
//   POST /api/recourse  {instance, preferences, seed, method, trace}
//   POST /api/whatif    {instance, profiles: [...], seed, method, trace}
//
// Errors: 400 malformed body or invalid profile, 404 unknown route, 405 wrong
// verb, 422 instance already classified +1.
class Service {
 public:
  explicit Service(std::shared_ptr<const Session> session);

  Response handle(const std::string& method, const std::string& path,
                  const std::string& body) const;

  // Binds the HTTP listener (port 0 picks a free port) and returns the bound
  // port. Files under `static_dir`, if given, are served from "/".
  int bind(const std::string& host, int port, const std::string& static_dir = "");
  // Blocks until stop() is called from another thread.
  void listen();
  void wait_until_ready() const;
  void stop();

 private:
  Response recourse(const nlohmann::json& req) const;
  Response whatif(const nlohmann::json& req) const;

  std::shared_ptr<const Session> session_;
  struct Server;
  std::shared_ptr<Server> server_;
};

}  // namespace upar

#endif  // UPAR_SERVICE_HPP
