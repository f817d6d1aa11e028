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

// Command-line front end. Talks to the engine only through the C API.
//
//   upar run       --config experiment.json [--out DIR] [--seed N]
//   upar recourse  --config session.json --instance x.json [--profile p.json]
//                  [--seed N] [--method M] [--trace] [--json]
//   upar serve     --config session.json [--host H] [--port P] [--static DIR]
//   upar train     --config session.json --out model.json
//   upar synth     --schema schema.json --n N --seed S [--separation D] --out data.csv
//
// Exit codes: 0 success, 1 usage or input error, 2 invalid preferences,
// 3 instance already favourable, 4 i/o error, 5 other failure.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "upar/upar.h"

namespace {

int exit_code(upar_status s) {
  switch (s) {
    case UPAR_OK: return 0;
    case UPAR_ERR_INVALID_ARGUMENT: return 1;
    case UPAR_ERR_INVALID_PROFILE: return 2;
    case UPAR_ERR_PRECONDITION: return 3;
    case UPAR_ERR_IO: return 4;
    default: return 5;
  }
}

int report(upar_status s) {
  if (s != UPAR_OK) std::cerr << "upar: " << upar_status_name(s) << ": " << upar_last_error() << "\n";
  return exit_code(s);
}

// Takes ownership of a C API string.
std::string take(char* s) {
  std::string out = s ? s : "";
  upar_string_free(s);
  return out;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return nlohmann::json::parse(ss.str());
}

struct Session {
  upar_session* h = nullptr;
  ~Session() { upar_session_close(h); }
};

int cmd_run(const std::string& config, const std::string& out, std::int64_t seed) {
  char* summary = nullptr;
  const auto s = upar_run_experiment(config.c_str(), out.empty() ? nullptr : out.c_str(), seed,
                                     &summary);
  if (s != UPAR_OK) return report(s);
  const auto doc = nlohmann::json::parse(take(summary));
  std::cout << "point method tau step_mult subset seed success prmse mean_cost\n";
  for (const auto& p : doc["points"]) {
    const auto& m = p["metrics"];
    std::cout << p["point"] << " " << p["method"].get<std::string>() << " " << p["tau"] << " "
              << p["step_multiplier"] << " " << p["subset_size"] << " " << p["seed"] << " "
              << m["success_rate"] << " " << m["prmse"] << " " << p["mean_cost"] << "\n";
  }
  for (const auto& w : doc["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
  return 0;
}

int cmd_recourse(const std::string& config, const std::string& instance,
                 const std::string& profile, std::int64_t seed, const std::string& method,
                 bool trace, bool as_json) {
  nlohmann::json req;
  try {
    req["instance"] = read_json(instance);
    if (!profile.empty()) req["preferences"] = read_json(profile);
  } catch (const std::exception& e) {
    std::cerr << "upar: " << e.what() << "\n";
    return 1;
  }
  if (seed >= 0) req["seed"] = static_cast<std::uint64_t>(seed);
  req["method"] = method;
  req["trace"] = trace;

  Session sess;
  auto s = upar_session_open_file(config.c_str(), &sess.h);
  if (s != UPAR_OK) return report(s);
  char* out = nullptr;
  const std::string body = req.dump();
  s = as_json ? upar_recourse_json(sess.h, body.c_str(), &out)
              : upar_recourse_text(sess.h, body.c_str(), trace ? 1 : 0, &out);
  const std::string text = take(out);
  if (s == UPAR_ERR_PRECONDITION) {
    std::cerr << "upar: the instance is already classified favourably; no recourse is needed\n";
    return exit_code(s);
  }
  if (s == UPAR_ERR_INVALID_PROFILE) {
    std::cerr << text;
    return exit_code(s);
  }
  if (s != UPAR_OK) return report(s);
  std::cout << text << (as_json ? "\n" : "");
  return 0;
}

int cmd_serve(const std::string& config, const std::string& host, int port,
              const std::string& static_dir) {
  if (port < 0) {
    const char* env = std::getenv("UPAR_PORT");
    port = env ? std::atoi(env) : 8080;
  }
  Session sess;
  auto s = upar_session_open_file(config.c_str(), &sess.h);
  if (s != UPAR_OK) return report(s);
  std::cerr << "upar: serving on http://" << host << ":" << port << "\n";
  return report(upar_serve(sess.h, host.c_str(), port, static_dir.empty() ? nullptr : static_dir.c_str()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference-guided actionable recourse"};
  app.set_version_flag("--version", std::string(upar_version()));
  app.require_subcommand(1);

  std::string config, out, instance, profile, method = "upar", host = "127.0.0.1", static_dir;
  std::string schema;
  std::int64_t seed = -1;
  bool trace = false, as_json = false;
  int port = -1;
  std::size_t n = 1000;
  double separation = 0.05;

  auto* run = app.add_subcommand("run", "run an experiment sweep");
  run->add_option("--config", config, "experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory (overrides the config)");
  run->add_option("--seed", seed, "single seed replacing the config seeds");

  auto* rec = app.add_subcommand("recourse", "recourse for one instance");
  rec->add_option("--config", config, "session config")->required()->check(CLI::ExistingFile);
  rec->add_option("--instance", instance, "instance JSON")->required()->check(CLI::ExistingFile);
  rec->add_option("--profile", profile, "preference profile JSON")->check(CLI::ExistingFile);
  rec->add_option("--seed", seed, "random seed (default 0)");
  rec->add_option("--method", method, "upar, growing_spheres or wachter");
  rec->add_flag("--trace", trace, "print one line per search step");
  rec->add_flag("--json", as_json, "print the JSON result document");

  auto* srv = app.add_subcommand("serve", "HTTP service");
  srv->add_option("--config", config, "session config")->required()->check(CLI::ExistingFile);
  srv->add_option("--host", host, "bind address");
  srv->add_option("--port", port, "port (default $UPAR_PORT, else 8080)");
  srv->add_option("--static", static_dir, "directory served at /");

  auto* trn = app.add_subcommand("train", "train the model of a session config");
  trn->add_option("--config", config, "config with model.train")->required()->check(CLI::ExistingFile);
  trn->add_option("--out", out, "model JSON path")->required();

  auto* syn = app.add_subcommand("synth", "write a synthetic labelled dataset");
  syn->add_option("--schema", schema, "schema JSON")->required()->check(CLI::ExistingFile);
  syn->add_option("--n", n, "rows");
  syn->add_option("--seed", seed, "random seed (default 0)");
  syn->add_option("--separation", separation, "class margin in scaled units");
  syn->add_option("--out", out, "CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run) return cmd_run(config, out, seed);
  if (*rec) return cmd_recourse(config, instance, profile, seed, method, trace, as_json);
  if (*srv) return cmd_serve(config, host, port, static_dir);
  if (*trn) {
    char* rep = nullptr;
    const auto s = upar_train_model(config.c_str(), out.c_str(), &rep);
    if (s != UPAR_OK) return report(s);
    std::cout << take(rep) << "\n";
    return 0;
  }
  if (*syn) {
    return report(upar_synthesize(schema.c_str(), seed < 0 ? 0 : static_cast<std::uint64_t>(seed), n,
                                  separation, out.c_str()));
  }
  return 1;
}
