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

// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "upar/upar.h"

namespace {

std::string dir() { return UPAR_TEST_DATA_DIR; }

std::string take(char* s) {
  std::string out = s ? s : "";
  upar_string_free(s);
  return out;
}

struct Handle {
  upar_session* h = nullptr;
  ~Handle() { upar_session_close(h); }
};

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(upar_version()) == "0.1.0");
  CHECK(std::string(upar_status_name(UPAR_OK)) == "ok");
  CHECK(std::string(upar_status_name(UPAR_ERR_INVALID_PROFILE)) == "invalid profile");
  CHECK(std::string(upar_status_name(static_cast<upar_status>(99))) == "unknown status");
}

TEST_CASE("null arguments are rejected") {
  CHECK(upar_session_open(nullptr, nullptr, nullptr) == UPAR_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(upar_last_error()) > 0);
  char* out = nullptr;
  CHECK(upar_recourse_json(nullptr, "{}", &out) == UPAR_ERR_INVALID_ARGUMENT);
  upar_session_close(nullptr);
}

TEST_CASE("open errors map to status codes") {
  upar_session* h = nullptr;
  CHECK(upar_session_open_file((dir() + "/nope.json").c_str(), &h) == UPAR_ERR_IO);
  CHECK(h == nullptr);
  CHECK(upar_session_open("{broken", nullptr, &h) == UPAR_ERR_INVALID_ARGUMENT);
}

TEST_CASE("recourse round trip") {
  Handle s;
  REQUIRE(upar_session_open_file((dir() + "/toy1d/session.json").c_str(), &s.h) == UPAR_OK);
  char* out = nullptr;
  REQUIRE(upar_recourse_json(s.h, R"({"instance": {"X": -0.5}, "seed": 2})", &out) == UPAR_OK);
  const auto j = nlohmann::json::parse(take(out));
  CHECK(j["valid"] == true);
  CHECK(j["steps_used"] == 5);

  CHECK(upar_recourse_json(s.h, R"({"instance": {"X": 0.5}})", &out) == UPAR_ERR_PRECONDITION);
  take(out);
  CHECK(upar_recourse_json(s.h, R"({"instance": {"X": -0.5}, "preferences": {"tau": -1}})", &out) ==
        UPAR_ERR_INVALID_PROFILE);
  CHECK(nlohmann::json::parse(take(out)).contains("violations"));

  REQUIRE(upar_recourse_text(s.h, R"({"instance": {"X": -0.5}})", 1, &out) == UPAR_OK);
  CHECK(take(out).find("t=5") != std::string::npos);
  CHECK(upar_recourse_text(s.h, R"({"instance": {"X": -0.5}, "preferences": {"gamma": {"X": 0.5}}})", 0,
                           &out) == UPAR_ERR_INVALID_PROFILE);
  CHECK(take(out).find("invalid preferences") == 0);
}

TEST_CASE("generic request routing") {
  Handle s;
  REQUIRE(upar_session_open_file((dir() + "/toy1d/session.json").c_str(), &s.h) == UPAR_OK);
  int status = 0;
  char* out = nullptr;
  REQUIRE(upar_session_request(s.h, "GET", "/api/defaults", nullptr, &status, &out) == UPAR_OK);
  CHECK(status == 200);
  CHECK(nlohmann::json::parse(take(out))["tau"] == 0.25);
  REQUIRE(upar_session_request(s.h, "GET", "/api/missing", "", &status, &out) == UPAR_OK);
  CHECK(status == 404);
  take(out);
  REQUIRE(upar_validate_json(s.h, R"({"tau": 0.5})", &out) == UPAR_OK);
  CHECK(nlohmann::json::parse(take(out))["valid"] == true);
}

TEST_CASE("synthesis writes a csv") {
  const std::string csv = std::string(P_tmpdir) + "/upar_capi_synth.csv";
  REQUIRE(upar_synthesize((dir() + "/toy1d/schema.json").c_str(), 3, 50, 0.1, csv.c_str()) == UPAR_OK);
  Handle s;
  const auto cfg = nlohmann::json{{"schema", dir() + "/toy1d/schema.json"},
                                  {"dataset", {{"csv", csv}}},
                                  {"model", {{"load", dir() + "/toy1d/model.json"}}}};
  CHECK(upar_session_open(cfg.dump().c_str(), nullptr, &s.h) == UPAR_OK);
  CHECK(upar_synthesize((dir() + "/toy1d/schema.json").c_str(), 3, 5, 0.1, csv.c_str()) ==
        UPAR_ERR_INVALID_ARGUMENT);
}

TEST_CASE("training through the library") {
  const std::string model = std::string(P_tmpdir) + "/upar_capi_model.json";
  char* report = nullptr;
  REQUIRE(upar_train_model((dir() + "/credit/session.json").c_str(), model.c_str(), &report) == UPAR_OK);
  const auto r = nlohmann::json::parse(take(report));
  CHECK(r["rows"] == 1000);
  CHECK(r["train_accuracy"].get<double>() > 0.7);
  CHECK(upar_train_model((dir() + "/toy1d/session.json").c_str(), model.c_str(), &report) ==
        UPAR_ERR_INVALID_ARGUMENT);
}
