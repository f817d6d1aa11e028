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

#ifndef UPAR_COST_HPP
#define UPAR_COST_HPP

#include <map>
#include <optional>
#include <span>
#include <string>

#include "upar/data.hpp"

namespace upar {

struct CostConfig {
  double epsilon_q = 0.005;  // percentile clamp, Q in [eps_q, 1 - eps_q]
  double epsilon_c = 1e-4;   // floor for any nonzero move
};

// Log percentile shift |log((1 - Q(x + r)) / (1 - Q(x)))| with clamped Q.
// Exactly 0 for r == 0, at least epsilon_c otherwise.
double shift_cost(const QuantileTable& q, std::size_t feature, double x, double r,
                  const CostConfig& cfg);

// Marginal cost of moving from `current` by `step`.
inline double step_cost(const QuantileTable& q, std::size_t feature, double current,
                        double step, const CostConfig& cfg) {
  return shift_cost(q, feature, current, step, cfg);
}

// Sum of shift costs over actionable features. Throws InvalidArgument when
// `r` moves a non-actionable feature.
double total_cost(const QuantileTable& q, const DatasetSchema& schema, std::span<const double> x,
                  std::span<const double> r, const CostConfig& cfg);

// Sum of shift costs over actionable continuous features only.
double continuous_cost(const QuantileTable& q, const DatasetSchema& schema,
                       std::span<const double> x, std::span<const double> r,
                       const CostConfig& cfg);

// Share of the continuous cost carried by each actionable continuous feature.
// nullopt when no continuous feature moved.
std::optional<std::map<std::string, double>> fractional_costs(const QuantileTable& q,
                                                              const DatasetSchema& schema,
                                                              std::span<const double> x,
                                                              std::span<const double> r,
                                                              const CostConfig& cfg);

}  // namespace upar

#endif  // UPAR_COST_HPP
