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

#include "upar/cost.hpp"

#include <algorithm>
#include <cmath>

#include "upar/error.hpp"

namespace upar {

double shift_cost(const QuantileTable& q, std::size_t feature, double x, double r,
                  const CostConfig& cfg) {
  if (r == 0.0) return 0.0;
  const double lo = cfg.epsilon_q;
  const double hi = 1.0 - cfg.epsilon_q;
  const double q_from = std::clamp(q.percentile(feature, x), lo, hi);
  const double q_to = std::clamp(q.percentile(feature, x + r), lo, hi);
  return std::max(std::abs(std::log((1.0 - q_to) / (1.0 - q_from))), cfg.epsilon_c);
}

double total_cost(const QuantileTable& q, const DatasetSchema& schema, std::span<const double> x,
                  std::span<const double> r, const CostConfig& cfg) {
  if (x.size() != schema.dim() || r.size() != schema.dim()) {
    throw InvalidArgument("total_cost: dimension mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] == 0.0) continue;
    if (!schema.feature(i).actionable) {
      throw InvalidArgument("total_cost: action on non-actionable feature '" +
                            schema.feature(i).name + "'");
    }
    total += shift_cost(q, i, x[i], r[i], cfg);
  }
  return total;
}

double continuous_cost(const QuantileTable& q, const DatasetSchema& schema,
                       std::span<const double> x, std::span<const double> r,
                       const CostConfig& cfg) {
  double total = 0.0;
  for (const auto i : schema.actionable_continuous()) total += shift_cost(q, i, x[i], r[i], cfg);
  return total;
}

std::optional<std::map<std::string, double>> fractional_costs(const QuantileTable& q,
                                                              const DatasetSchema& schema,
                                                              std::span<const double> x,
                                                              std::span<const double> r,
                                                              const CostConfig& cfg) {
  const auto cont = schema.actionable_continuous();
  std::vector<double> costs;
  double total = 0.0;
  for (const auto i : cont) {
    costs.push_back(shift_cost(q, i, x[i], r[i], cfg));
    total += costs.back();
  }
  if (!(total > 0.0)) return std::nullopt;
  std::map<std::string, double> out;
  for (std::size_t k = 0; k < cont.size(); ++k) {
    out[schema.feature(cont[k]).name] = costs[k] / total;
  }
  return out;
}

}  // namespace upar
