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

// Batch experiments: a sweep over (method, tau, step multiplier, actionable
// subset size, seed) applied to every negatively classified individual of a
// dataset. Output file layout is documented in docs/formats.md.

#ifndef UPAR_EXPERIMENT_HPP
#define UPAR_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "upar/metrics.hpp"
#include "upar/session.hpp"

namespace upar {

// Per-individual Gamma draw: `feature` takes a value from `candidates`, the
// remainder is split evenly over the other actionable continuous features.
struct RandomGammaSpec {
  std::string feature;  // empty: first actionable continuous feature
  std::vector<double> candidates;
};

struct ExperimentConfig {
  nlohmann::json session;  // schema / dataset / model / cost / engine keys
  std::filesystem::path base_dir;
  std::vector<std::string> methods{"upar"};
  nlohmann::json fixed_preferences;  // null: schema defaults
  std::map<std::size_t, nlohmann::json> per_row_preferences;
  std::optional<RandomGammaSpec> random_gamma;
  std::vector<double> taus;  // empty: profile tau
  std::vector<double> step_multipliers{1.0};
  std::vector<std::size_t> subset_sizes;  // empty: every actionable feature
  std::vector<std::string> actionable_order;  // subset k = first k names
  std::vector<std::uint64_t> seeds{0};
  std::size_t max_individuals = 0;  // 0: all negatives
  std::string group_by;
  std::size_t threads = 1;
  std::string output_dir;
};

// Throws InvalidArgument naming the offending key.
ExperimentConfig experiment_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
// As above, with the config line of the offending key in the message.
ExperimentConfig load_experiment(const std::string& path);

struct IndividualOutcome {
  std::size_t row = 0;
  std::vector<double> x;
  PreferenceProfile profile;
  RecourseResult result;
  std::string group;
};

struct SweepPoint {
  std::size_t index = 0;
  std::string method;
  double tau = 0.0;
  double step_multiplier = 1.0;
  std::size_t subset_size = 0;
  std::uint64_t seed = 0;
  std::vector<IndividualOutcome> outcomes;
  MetricsReport report;
  double mean_cost = 0.0;  // total_cost_after over valid results
  double sd_cost = 0.0;
};

struct ExperimentOutput {
  std::vector<SweepPoint> points;
  std::vector<std::string> warnings;
};

// Individual seed used for row `row` under sweep seed `seed`.
std::uint64_t individual_seed(std::uint64_t seed, std::size_t row);

// Runs the sweep and, when output_dir is set, writes the result files.
ExperimentOutput run_experiment(const ExperimentConfig& config);
void write_outputs(const ExperimentOutput& out, const Session& session,
                   const std::string& output_dir);

}  // namespace upar

#endif  // UPAR_EXPERIMENT_HPP
