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

#ifndef UPAR_METRICS_HPP
#define UPAR_METRICS_HPP

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "upar/data.hpp"
#include "upar/engine.hpp"
#include "upar/model.hpp"
#include "upar/preferences.hpp"

namespace upar {

// One attempted recourse with everything needed to score it.
struct Evaluated {
  RecourseResult result;
  std::vector<double> x;
  std::map<std::string, double> gamma;  // requested Gamma for this individual
  std::string group;                    // optional group-by key
};

struct PrmseReport {
  double prmse = 0.0;
  std::map<std::string, double> per_feature;
  std::size_t included = 0;
  std::size_t excluded = 0;  // no continuous action, Gamma-hat undefined
};

struct MetricsReport {
  std::size_t attempts = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double avg_time_s = 0.0;
  double constraint_violations = 0.0;
  double redundancy = 0.0;
  double proximity = 0.0;
  double sparsity = 0.0;
  std::optional<PrmseReport> prmse;
  std::map<std::string, MetricsReport> groups;
};

// Throws InvalidArgument on empty input.
double success_rate(std::span<const RecourseResult> results);
std::size_t constraint_violations(std::span<const double> r, const DatasetSchema& schema);
// Moved features whose individual reversion keeps the label +1.
std::size_t redundancy(const Predictor& model, std::span<const double> x,
                       std::span<const double> r);
double proximity(std::span<const double> x, std::span<const double> r,
                 const DatasetSchema& schema);
std::size_t sparsity(std::span<const double> r);

// Per-feature RMSE between observed and requested fractional costs, then
// averaged over features. Individuals with no Gamma-hat are excluded. Throws
// InvalidArgument when every individual is excluded.
PrmseReport prmse(const std::vector<std::optional<std::map<std::string, double>>>& observed,
                  const std::vector<std::map<std::string, double>>& requested);

// Means over valid results except success_rate (over all attempts).
MetricsReport evaluate(const Predictor& model, const DatasetSchema& schema,
                       std::span<const Evaluated> items);
// Independent sub-reports keyed by Evaluated::group; throws on an empty group
// list.
std::map<std::string, MetricsReport> grouped(const Predictor& model, const DatasetSchema& schema,
                                             std::span<const Evaluated> items);

struct LemmaFeatureCheck {
  std::string feature;
  double mean_cost = 0.0;
  double std_error = 0.0;
  double c_min = 0.0;
  double c_max = 0.0;
  double sigma = 0.0;  // softmax probability bound
  double bound = 0.0;  // T* * sigma * c_max
  bool satisfied = false;
};

struct LemmaCheck {
  long t_star = 0;
  std::vector<LemmaFeatureCheck> features;
  double total_mean_cost = 0.0;
  double total_bound = 0.0;  // sum of per-feature bounds
  bool total_satisfied = false;
};

// Empirical check of the expected per-feature cost bound
//   E[cost(r_i, x_i)] <= T* sigma_i C_max,i
// over trajectories of one instance. C_min and C_max are the extremes of the
// prospective per-step costs observed for the feature, T* the largest number
// of steps used, and sigma_i the softmax weight of feature i when its score is
// Gamma_i / C_min,i and every other feature scores Gamma_j / C_max,j. Each
// trajectory's cost is the shift cost of its final stage-1 candidate.
LemmaCheck lemma_bound_check(const std::vector<Trajectory>& trajectories,
                             std::span<const double> x, const PreferenceProfile& profile,
                             const DatasetSchema& schema, const QuantileTable& q,
                             const CostConfig& cfg);

nlohmann::json report_to_json(const MetricsReport& report);
// Column order: success_rate, prmse, avg_time_s, con_vio, redundancy,
// proximity, sparsity.
std::string report_csv_header();
std::string report_csv_row(const MetricsReport& report);

}  // namespace upar

#endif  // UPAR_METRICS_HPP
