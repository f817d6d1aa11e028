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

#include "upar/upar.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "upar/error.hpp"
#include "upar/experiment.hpp"
#include "upar/service.hpp"
#include "upar/session.hpp"

struct upar_session {
  std::shared_ptr<const upar::Session> session;
  std::unique_ptr<upar::Service> service;
};

namespace {

thread_local std::string g_last_error;

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

upar_status fail(upar_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

// Runs `fn`, mapping library exceptions onto status codes.
template <typename Fn>
upar_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    return fn();
  } catch (const upar::InvalidArgument& e) {
    return fail(UPAR_ERR_INVALID_ARGUMENT, e.what());
  } catch (const upar::PreconditionError& e) {
    return fail(UPAR_ERR_PRECONDITION, e.what());
  } catch (const upar::IoError& e) {
    return fail(UPAR_ERR_IO, e.what());
  } catch (const upar::NumericError& e) {
    return fail(UPAR_ERR_NUMERIC, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(UPAR_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(UPAR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(UPAR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(UPAR_ERR_INTERNAL, "unknown error");
  }
}

upar_status from_http(const upar::Response& r) {
  if (r.status == 200) return UPAR_OK;
  const auto body = nlohmann::json::parse(r.body, nullptr, false);
  const std::string msg =
      body.is_object() && body.contains("error") ? body["error"].get<std::string>() : r.body;
  if (r.status == 422) return fail(UPAR_ERR_PRECONDITION, msg);
  if (r.status == 400 && body.is_object() && body.contains("violations")) {
    return fail(UPAR_ERR_INVALID_PROFILE, msg);
  }
  if (r.status == 400) return fail(UPAR_ERR_INVALID_ARGUMENT, msg);
  return fail(UPAR_ERR_INTERNAL, msg);
}

upar_session* make_session(upar::Session s) {
  auto* h = new upar_session;
  h->session = std::make_shared<const upar::Session>(std::move(s));
  h->service = std::make_unique<upar::Service>(h->session);
  return h;
}

}  // namespace

extern "C" {

const char* upar_version(void) { return "0.1.0"; }

const char* upar_status_name(upar_status status) {
  switch (status) {
    case UPAR_OK: return "ok";
    case UPAR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case UPAR_ERR_INVALID_PROFILE: return "invalid profile";
    case UPAR_ERR_PRECONDITION: return "precondition failed";
    case UPAR_ERR_IO: return "i/o error";
    case UPAR_ERR_NUMERIC: return "numeric error";
    case UPAR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* upar_last_error(void) { return g_last_error.c_str(); }

void upar_string_free(char* s) { std::free(s); }

upar_status upar_session_open(const char* config_json, const char* base_dir, upar_session** out) {
  return guarded([&] {
    if (!config_json || !out) return fail(UPAR_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    const auto config = nlohmann::json::parse(config_json);
    *out = make_session(upar::open_session(config, base_dir ? base_dir : "."));
    return UPAR_OK;
  });
}

upar_status upar_session_open_file(const char* config_path, upar_session** out) {
  return guarded([&] {
    if (!config_path || !out) return fail(UPAR_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    *out = make_session(upar::open_session_file(config_path));
    return UPAR_OK;
  });
}

void upar_session_close(upar_session* session) { delete session; }

upar_status upar_session_request(const upar_session* session, const char* method,
                                 const char* path, const char* body, int* http_status,
                                 char** response) {
  return guarded([&] {
    if (!session || !method || !path || !http_status || !response) {
      return fail(UPAR_ERR_INVALID_ARGUMENT, "null argument");
    }
    const auto r = session->service->handle(method, path, body ? body : "");
    *http_status = r.status;
    *response = dup(r.body);
    return UPAR_OK;
  });
}

upar_status upar_recourse_json(const upar_session* session, const char* request_json,
                               char** out) {
  return guarded([&] {
    if (!session || !request_json || !out) return fail(UPAR_ERR_INVALID_ARGUMENT, "null argument");
    const auto r = session->service->handle("POST", "/api/recourse", request_json);
    *out = dup(r.body);
    return from_http(r);
  });
}

upar_status upar_recourse_text(const upar_session* session, const char* request_json, int trace,
                               char** out) {
  return guarded([&] {
    if (!session || !request_json || !out) return fail(UPAR_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    const auto& s = *session->session;
    const auto req = nlohmann::json::parse(request_json);
    if (!req.is_object() || !req.contains("instance")) {
      return fail(UPAR_ERR_INVALID_ARGUMENT, "request needs an 'instance'");
    }
    const auto x = upar::instance_from_json(req.at("instance"), s.schema);
    const auto profile =
        upar::profile_from_json(req.value("preferences", nlohmann::json()), s.schema);
    const auto violations = upar::validate(profile, s.schema);
    if (!violations.empty()) {
      std::string text = "invalid preferences:\n";
      for (const auto& v : violations) text += "  " + v.field + ": " + v.message + "\n";
      *out = dup(text);
      return fail(UPAR_ERR_INVALID_PROFILE, "invalid preferences");
    }
    const std::uint64_t seed = req.value("seed", std::uint64_t{0});
    const auto method = req.value("method", std::string("upar"));
    const auto result = upar::run_method(s, method, x, profile, seed);
    *out = dup(upar::format_recourse(s, x, profile, result, trace != 0));
    return UPAR_OK;
  });
}

upar_status upar_validate_json(const upar_session* session, const char* profile_json, char** out) {
  return guarded([&] {
    if (!session || !profile_json || !out) return fail(UPAR_ERR_INVALID_ARGUMENT, "null argument");
    const auto r = session->service->handle("POST", "/api/validate", profile_json);
    *out = dup(r.body);
    return from_http(r);
  });
}

upar_status upar_serve(const upar_session* session, const char* host, int port,
                       const char* static_dir) {
  return guarded([&] {
    if (!session) return fail(UPAR_ERR_INVALID_ARGUMENT, "null session");
    upar::Service service(session->session);
    service.bind(host ? host : "127.0.0.1", port, static_dir ? static_dir : "");
    service.listen();
    return UPAR_OK;
  });
}

upar_status upar_run_experiment(const char* config_path, const char* output_dir,
                                int64_t seed_override, char** summary) {
  return guarded([&] {
    if (!config_path) return fail(UPAR_ERR_INVALID_ARGUMENT, "null config path");
    auto cfg = upar::load_experiment(config_path);
    if (output_dir) cfg.output_dir = output_dir;
    if (seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
    const auto result = upar::run_experiment(cfg);
    if (summary) {
      nlohmann::json points = nlohmann::json::array();
      for (const auto& pt : result.points) {
        points.push_back({{"point", pt.index},
                          {"method", pt.method},
                          {"tau", pt.tau},
                          {"step_multiplier", pt.step_multiplier},
                          {"subset_size", pt.subset_size},
                          {"seed", pt.seed},
                          {"mean_cost", pt.mean_cost},
                          {"sd_cost", pt.sd_cost},
                          {"metrics", upar::report_to_json(pt.report)}});
      }
      *summary = dup(nlohmann::json{{"points", points}, {"warnings", result.warnings}}.dump(2));
    }
    return UPAR_OK;
  });
}

upar_status upar_train_model(const char* config_path, const char* model_path, char** report) {
  return guarded([&] {
    if (!config_path || !model_path) return fail(UPAR_ERR_INVALID_ARGUMENT, "null argument");
    const auto config = upar::read_json_file(config_path);
    if (!config.contains("model") || !config.at("model").contains("train")) {
      return fail(UPAR_ERR_INVALID_ARGUMENT, "config has no model.train entry");
    }
    const auto base = std::filesystem::path(config_path).parent_path();
    const auto schema = upar::schema_from_spec(config.at("schema"), base);
    const auto data = upar::dataset_from_spec(config.at("dataset"), schema, base);
    const auto model = upar::train_from_spec(config.at("model").at("train"), data);
    upar::save_model(*model, model_path);
    if (report) {
      *report = dup(nlohmann::json{{"rows", data.size()},
                                   {"rejected_rows", data.rejected_rows},
                                   {"train_accuracy", upar::accuracy(*model, data)}}
                        .dump());
    }
    return UPAR_OK;
  });
}

upar_status upar_synthesize(const char* schema_path, uint64_t seed, size_t n, double separation,
                            const char* csv_path) {
  return guarded([&] {
    if (!schema_path || !csv_path) return fail(UPAR_ERR_INVALID_ARGUMENT, "null argument");
    const auto schema = upar::load_schema(schema_path);
    upar::write_csv(upar::generate_synthetic(seed, n, schema, separation), csv_path);
    return UPAR_OK;
  });
}

}  // extern "C"
