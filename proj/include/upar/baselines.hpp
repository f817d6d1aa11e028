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

// Comparison methods. Both work in min-max-scaled space, snap categorical
// coordinates to the nearest allowed value before classifying, and ignore
// actionability and user preferences.

#ifndef UPAR_BASELINES_HPP
#define UPAR_BASELINES_HPP

#include <cstdint>
#include <span>

#include "upar/cost.hpp"
#include "upar/data.hpp"
#include "upar/engine.hpp"
#include "upar/model.hpp"

namespace upar {

struct GrowingSpheresConfig {
  double initial_radius = 0.05;
  double growth = 1.5;
  std::size_t samples_per_shell = 200;
  std::size_t max_shells = 40;
};

struct WachterConfig {
  double lambda = 1.0;           // first distance/validity trade-off
  double lambda_growth = 10.0;   // multiplier between rounds
  std::size_t lambda_rounds = 8;
  double lr = 0.01;
  std::size_t max_iterations = 2000;
  double tolerance = 1e-7;       // stop a round when the step norm falls below
  double target = 0.51;          // probability the validity term pulls towards
};

struct BaselineConfig {
  GrowingSpheresConfig gs;
  WachterConfig wachter;
};

// Throws InvalidArgument when a field is out of range.
void check_config(const BaselineConfig& cfg);

// Samples uniformly in growing spherical shells around x and returns the
// closest +1 point of the first shell that contains one. Sample k of shell s
// depends only on (seed, s, k).
RecourseResult growing_spheres(const Predictor& model, const DatasetSchema& schema,
                               std::span<const double> x, const GrowingSpheresConfig& cfg,
                               std::uint64_t seed);

// Gradient descent on lambda * (P(+1 | x') - target)^2 + |x' - x|_2 with lambda
// raised until x' is classified +1.
RecourseResult wachter(const Predictor& model, const DatasetSchema& schema,
                       std::span<const double> x, const WachterConfig& cfg);

// Fills cost fields of a baseline result (costs over every moved feature,
// fractional costs over actionable continuous features).
void attach_costs(RecourseResult& result, const QuantileTable& q, const DatasetSchema& schema,
                  std::span<const double> x, const CostConfig& cfg);

}  // namespace upar

#endif  // UPAR_BASELINES_HPP
