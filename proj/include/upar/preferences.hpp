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

#ifndef UPAR_PREFERENCES_HPP
#define UPAR_PREFERENCES_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "upar/data.hpp"

namespace upar {

// Which end of the ranking acts first on categorical features.
enum class RankOrder { kAscending, kDescending };

// User preferences. All maps are keyed by feature name.
//  - gamma:   fractional-cost scores over actionable continuous features.
//  - bounds:  [lower, upper] on the reachable feature value x_i + r_i.
//  - steps:   step size per continuous feature.
//  - values:  ordered candidate values per categorical feature.
//  - ranking: positive rank per actionable categorical feature.
struct PreferenceProfile {
  std::map<std::string, double> gamma;
  std::map<std::string, std::pair<double, double>> bounds;
  std::map<std::string, double> steps;
  std::map<std::string, std::vector<double>> values;
  std::map<std::string, int> ranking;
  double tau = 0.25;
  long max_steps = 1000;
  RankOrder rank_order = RankOrder::kAscending;
};

struct Violation {
  std::string field;
  std::string message;
};

PreferenceProfile default_profile(const DatasetSchema& schema);

// Empty result means the profile is valid for `schema`.
std::vector<Violation> validate(const PreferenceProfile& profile, const DatasetSchema& schema);

// Divides scores by their sum. Throws InvalidArgument when no score is
// positive or any is negative.
std::map<std::string, double> renormalize_gamma(const std::map<std::string, double>& scores);
std::vector<double> renormalize_gamma(const std::vector<double>& scores);

// Preference fields resolved onto schema indices.
struct ResolvedPreferences {
  std::vector<double> gamma;  // 0 outside actionable continuous features
  std::vector<double> lower;  // value bounds, intersected with the domain
  std::vector<double> upper;
  std::vector<double> step;                     // continuous features
  std::vector<std::vector<double>> candidates;  // categorical features
  // Actionable categorical feature indices in the order they may act.
  std::vector<std::size_t> rank_sequence;
  double tau = 0.25;
  long max_steps = 1000;
};

ResolvedPreferences resolve(const PreferenceProfile& profile, const DatasetSchema& schema);

// JSON object with keys gamma, bounds ({name: [lo, hi]}), steps, values,
// ranking, tau, max_steps, rank_order ("ascending" | "descending"). Missing
// keys fall back to the schema defaults.
PreferenceProfile profile_from_json(const nlohmann::json& j, const DatasetSchema& schema);
nlohmann::json profile_to_json(const PreferenceProfile& profile);
nlohmann::json violations_to_json(const std::vector<Violation>& violations);

}  // namespace upar

#endif  // UPAR_PREFERENCES_HPP
