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

#ifndef UPAR_SESSION_HPP
#define UPAR_SESSION_HPP

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "upar/baselines.hpp"
#include "upar/data.hpp"
#include "upar/engine.hpp"
#include "upar/metrics.hpp"
#include "upar/model.hpp"
#include "upar/preferences.hpp"

namespace upar {

// Immutable artifacts shared by every recourse request: schema, model,
// reference dataset, percentile table and solver settings.
struct Session {
  DatasetSchema schema;
  std::shared_ptr<const Predictor> model;
  Dataset dataset;
  QuantileTable quantiles;
  EngineConfig engine;
  BaselineConfig baselines;
  std::vector<std::string> warnings;
};

// Config keys (paths resolve relative to `base_dir`):
//   schema:   path | inline schema object
//   dataset:  {"csv": path} | {"synthetic": {"seed", "n", "separation"}}
//   model:    {"load": path} | {"train": {...}} | inline model object
//   quantile_population: "all" | "positive"
//   cost, engine, baselines: solver settings
Session open_session(const nlohmann::json& config, const std::filesystem::path& base_dir);
Session open_session_file(const std::string& path);

nlohmann::json read_json_file(const std::string& path);

EngineConfig engine_config_from_json(const nlohmann::json& j);
BaselineConfig baseline_config_from_json(const nlohmann::json& j);
DatasetSchema schema_from_spec(const nlohmann::json& spec, const std::filesystem::path& base_dir);
Dataset dataset_from_spec(const nlohmann::json& spec, const DatasetSchema& schema,
                          const std::filesystem::path& base_dir);
// {"type": "linear" | "mlp", "l2", "epochs", "lr", "seed", "hidden",
//  "activation"}.
std::unique_ptr<Predictor> train_from_spec(const nlohmann::json& spec, const Dataset& dataset);
std::unique_ptr<Predictor> model_from_spec(const nlohmann::json& spec, const Dataset& dataset,
                                           const std::filesystem::path& base_dir);

// Instance from {name: value} or an array in schema order.
std::vector<double> instance_from_json(const nlohmann::json& j, const DatasetSchema& schema);

// Runs `method` ("upar", "growing_spheres", "wachter") for one instance.
RecourseResult run_method(const Session& session, const std::string& method,
                          std::span<const double> x, const PreferenceProfile& profile,
                          std::uint64_t seed);

// Result document with per-feature table and metric singletons.
nlohmann::json recourse_response(const Session& session, std::span<const double> x,
                                 const PreferenceProfile& profile, const RecourseResult& result,
                                 bool include_trace);

// Human-readable table: feature, current, suggested, cost, Gamma vs
// Gamma-hat; optionally one line per stage-1 step.
std::string format_recourse(const Session& session, std::span<const double> x,
                            const PreferenceProfile& profile, const RecourseResult& result,
                            bool trace);

}  // namespace upar

#endif  // UPAR_SESSION_HPP
