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

// User-preference guided recourse search.
//
// Stage 1 walks from x in fixed per-feature steps. At every step each
// actionable feature i gets a preference score
//
//     z_i = Gamma_i / c_i          (continuous)
//     z_j = 1 / c_j                (categorical)
//
// where c is the log-percentile-shift cost attached to the feature's next
// prospective step. A softmax with temperature tau maps z to probabilities,
// each feature moves with an independent Bernoulli draw, and the direction of
// a move is the sign of d P(+1) / d x_i. The walk stops at the first step t_hat
// that is classified +1.
//
// Stage 2 runs only if a categorical feature acted: the categorical values of
// step t_hat are pasted into every earlier candidate and the walk is retraced
// from t_hat downwards while the pasted candidate stays +1.

#ifndef UPAR_ENGINE_HPP
#define UPAR_ENGINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "upar/cost.hpp"
#include "upar/data.hpp"
#include "upar/model.hpp"
#include "upar/preferences.hpp"
#include "upar/rng.hpp"

namespace upar {

// Which cost enters the denominator of z.
//  kCumulative: cost from the original value x_i to the position after the
//               next step, cost(r_i + step, x_i).
//  kMarginal:   cost of the next step alone, cost(step, x_i + r_i).
enum class ZCostMode { kCumulative, kMarginal };

struct EngineConfig {
  CostConfig cost;
  ZCostMode z_cost = ZCostMode::kCumulative;
};

struct StepRecord {
  long t = 0;
  std::vector<int> acted;       // I^(t)
  std::vector<int> directions;  // prospective direction per feature
  std::vector<double> candidate;  // cumulative action r^(t)
  // Marginal cost of each feature's prospective step; 0 where the feature
  // had no admissible move.
  std::vector<double> marginal_costs;
  std::vector<double> weights;  // sampling probabilities
  double prediction = 0.0;      // P(+1) at x + r^(t)
};

struct Trajectory {
  std::vector<StepRecord> records;
  std::optional<long> t_hat;
  bool support_exhausted = false;  // stopped because no feature could move
};

struct RecourseResult {
  std::string method = "upar";
  bool valid = false;
  std::vector<double> stage1_action;
  std::vector<double> final_action;
  long steps_used = 0;
  long correction_step = 0;  // candidate index kept by stage 2
  bool corrected = false;    // stage 2 changed the stage-1 action
  double total_cost_before = 0.0;
  double total_cost_after = 0.0;
  std::optional<std::map<std::string, double>> fractional_costs;
  double final_probability = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  std::string diagnostics;
  Trajectory trajectory;
};

// Proposed next move per feature: direction in {-1, 0, +1} and the value the
// feature would take after the move.
struct ProspectiveMoves {
  std::vector<int> direction;
  std::vector<double> next_value;
};

// Bookkeeping carried through stage 1.
struct SearchState {
  std::vector<double> r;
  std::vector<long> step_count;     // continuous features: r_i = count * step_i
  std::vector<int> categorical_lock;  // direction of the first categorical move
  std::vector<bool> acted;
};

SearchState initial_state(std::size_t dim);

// exp(z_i / tau) / sum over eligible features; 0 where not eligible. Empty
// support gives all zeros.
std::vector<double> softmax_weights(std::span<const double> z, const std::vector<bool>& eligible,
                                    double tau);

// Sign of the model sensitivity, masked by monotonicity and value bounds.
// Categorical features try their neighbouring candidate values and move to
// the one that raises P(+1) the most.
ProspectiveMoves step_direction(const Predictor& model, const DatasetSchema& schema,
                                const ResolvedPreferences& prefs, std::span<const double> x,
                                const SearchState& state);

struct SamplingWeights {
  std::vector<double> weights;
  std::vector<double> z;
  std::vector<double> marginal_costs;
};

// Softmax over the preference scores of features with an admissible move.
SamplingWeights sampling_weights(const QuantileTable& q, const DatasetSchema& schema,
                                 std::span<const double> x, const SearchState& state,
                                 const ProspectiveMoves& moves, const std::vector<bool>& eligible,
                                 const ResolvedPreferences& prefs, const EngineConfig& cfg);

// Independent Bernoulli(weight_i) per feature.
std::vector<int> sample_indicators(std::span<const double> weights, Rng& rng);

// Stage 1. Throws PreconditionError when x is already classified +1.
Trajectory run_stage1(const Predictor& model, const DatasetSchema& schema,
                      std::span<const double> x, const PreferenceProfile& profile,
                      const QuantileTable& q, const EngineConfig& cfg, Rng& rng);

struct Correction {
  std::vector<double> action;
  long t = 0;  // index of the kept candidate (0 = categorical moves only)
  bool applied = false;
};

// Stage 2. Requires trajectory.t_hat.
Correction cost_correction(const Predictor& model, const DatasetSchema& schema,
                           std::span<const double> x, const Trajectory& trajectory,
                           const QuantileTable& q, const EngineConfig& cfg);

// Both stages plus cost bookkeeping. Throws InvalidArgument for an invalid
// profile and PreconditionError for an instance already classified +1.
RecourseResult generate_recourse(const Predictor& model, const DatasetSchema& schema,
                                 std::span<const double> x, const PreferenceProfile& profile,
                                 const QuantileTable& q, const EngineConfig& cfg,
                                 std::uint64_t seed);

// Serialisation. Timing is excluded unless requested so that identical runs
// serialise identically.
nlohmann::json result_to_json(const RecourseResult& result, const DatasetSchema& schema,
                              bool include_timing, bool include_trace);
nlohmann::json trace_to_json(const Trajectory& trajectory, const DatasetSchema& schema);

}  // namespace upar

#endif  // UPAR_ENGINE_HPP
