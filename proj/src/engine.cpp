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

#include "upar/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "upar/error.hpp"

namespace upar {

namespace {

std::vector<double> add(std::span<const double> x, std::span<const double> r) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + r[i];
  return out;
}

bool within(double v, double lo, double hi) {
  const double tol_lo = 1e-9 * std::max(1.0, std::abs(lo));
  const double tol_hi = 1e-9 * std::max(1.0, std::abs(hi));
  return v >= lo - tol_lo && v <= hi + tol_hi;
}

bool direction_allowed(Monotonicity m, int dir) {
  if (m == Monotonicity::kNonDecreasing && dir < 0) return false;
  if (m == Monotonicity::kNonIncreasing && dir > 0) return false;
  return true;
}

nlohmann::json named(const DatasetSchema& schema, std::span<const double> v) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < v.size(); ++i) out[schema.feature(i).name] = v[i];
  return out;
}

}  // namespace

SearchState initial_state(std::size_t dim) {
  SearchState s;
  s.r.assign(dim, 0.0);
  s.step_count.assign(dim, 0);
  s.categorical_lock.assign(dim, 0);
  s.acted.assign(dim, false);
  return s;
}

std::vector<double> softmax_weights(std::span<const double> z, const std::vector<bool>& eligible,
                                    double tau) {
  std::vector<double> w(z.size(), 0.0);
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (eligible[i]) zmax = std::max(zmax, z[i]);
  }
  if (!std::isfinite(zmax)) return w;
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!eligible[i]) continue;
    w[i] = std::exp((z[i] - zmax) / tau);
    sum += w[i];
  }
  for (auto& wi : w) wi /= sum;
  return w;
}

ProspectiveMoves step_direction(const Predictor& model, const DatasetSchema& schema,
                                const ResolvedPreferences& prefs, std::span<const double> x,
                                const SearchState& state) {
  const std::size_t d = schema.dim();
  ProspectiveMoves moves;
  moves.direction.assign(d, 0);
  moves.next_value.assign(d, 0.0);
  const auto pos = add(x, state.r);
  for (std::size_t i = 0; i < d; ++i) moves.next_value[i] = pos[i];

  const auto sens = model.sensitivity(pos);
  const double p_now = model.predict_proba(pos);
  for (const auto i : schema.actionable()) {
    const auto& f = schema.feature(i);
    if (f.is_continuous()) {
      const double step = prefs.step[i];
      int dir = sens[i] > 0.0 ? 1 : (sens[i] < 0.0 ? -1 : 0);
      if (dir == 0 || step <= 0.0 || !direction_allowed(f.monotonicity, dir)) continue;
      const double next = x[i] + static_cast<double>(state.step_count[i] + dir) * step;
      if (!within(next, prefs.lower[i], prefs.upper[i])) continue;
      moves.direction[i] = dir;
      moves.next_value[i] = next;
      continue;
    }

    const auto& cands = prefs.candidates[i];
    const double cur = pos[i];
    std::optional<double> up, down;
    for (const double v : cands) {
      if (!within(v, prefs.lower[i], prefs.upper[i])) continue;
      if (v > cur && !up) up = v;
      if (v < cur) down = v;
    }
    double best_gain = 0.0;
    auto consider = [&](std::optional<double> v, int dir) {
      if (!v || !direction_allowed(f.monotonicity, dir)) return;
      if (state.categorical_lock[i] != 0 && state.categorical_lock[i] != dir) return;
      auto trial = pos;
      trial[i] = *v;
      const double gain = model.predict_proba(trial) - p_now;
      if (gain > best_gain) {
        best_gain = gain;
        moves.direction[i] = dir;
        moves.next_value[i] = *v;
      }
    };
    consider(up, 1);
    consider(down, -1);
  }
  return moves;
}

SamplingWeights sampling_weights(const QuantileTable& q, const DatasetSchema& schema,
                                 std::span<const double> x, const SearchState& state,
                                 const ProspectiveMoves& moves, const std::vector<bool>& eligible,
                                 const ResolvedPreferences& prefs, const EngineConfig& cfg) {
  const std::size_t d = schema.dim();
  SamplingWeights out;
  out.z.assign(d, 0.0);
  out.marginal_costs.assign(d, 0.0);
  std::vector<bool> support(d, false);
  for (std::size_t i = 0; i < d; ++i) {
    if (!eligible[i] || moves.direction[i] == 0) continue;
    const double cur = x[i] + state.r[i];
    const double next = moves.next_value[i];
    const double marginal = step_cost(q, i, cur, next - cur, cfg.cost);
    double denom = marginal;
    if (cfg.z_cost == ZCostMode::kCumulative) {
      const double cumulative = shift_cost(q, i, x[i], next - x[i], cfg.cost);
      if (cumulative > 0.0) denom = cumulative;
    }
    const double numerator = schema.feature(i).is_categorical() ? 1.0 : prefs.gamma[i];
    out.marginal_costs[i] = marginal;
    out.z[i] = numerator / denom;
    support[i] = true;
  }
  out.weights = softmax_weights(out.z, support, prefs.tau);
  return out;
}

std::vector<int> sample_indicators(std::span<const double> weights, Rng& rng) {
  std::vector<int> out(weights.size(), 0);
  for (std::size_t i = 0; i < weights.size(); ++i) out[i] = rng.bernoulli(weights[i]) ? 1 : 0;
  return out;
}

Trajectory run_stage1(const Predictor& model, const DatasetSchema& schema,
                      std::span<const double> x, const PreferenceProfile& profile,
                      const QuantileTable& q, const EngineConfig& cfg, Rng& rng) {
  check_model_schema(model, schema);
  if (x.size() != schema.dim()) throw InvalidArgument("run_stage1: instance dimension mismatch");
  if (model.predict_label(x) == 1) {
    throw PreconditionError("instance is already classified favourably");
  }
  const auto prefs = resolve(profile, schema);
  const std::size_t d = schema.dim();
  SearchState state = initial_state(d);
  Trajectory traj;

  for (long t = 1; t <= prefs.max_steps; ++t) {
    const auto moves = step_direction(model, schema, prefs, x, state);
    std::vector<bool> eligible(d, false);
    for (std::size_t i = 0; i < d; ++i) eligible[i] = moves.direction[i] != 0;

    // A categorical feature acts for the first time only after every
    // feature ranked before it has acted or cannot move.
    bool blocked = false;
    for (const auto j : prefs.rank_sequence) {
      if (state.acted[j]) continue;
      if (blocked) eligible[j] = false;
      if (moves.direction[j] != 0) blocked = true;
    }

    if (std::none_of(eligible.begin(), eligible.end(), [](bool b) { return b; })) {
      traj.support_exhausted = true;
      break;
    }
    const auto sw = sampling_weights(q, schema, x, state, moves, eligible, prefs, cfg);
    const auto indicators = sample_indicators(sw.weights, rng);

    StepRecord rec;
    rec.t = t;
    rec.acted.assign(d, 0);
    for (std::size_t i = 0; i < d; ++i) {
      if (!indicators[i] || !eligible[i]) continue;
      const int dir = moves.direction[i];
      if (schema.feature(i).is_continuous()) {
        state.step_count[i] += dir;
        state.r[i] = static_cast<double>(state.step_count[i]) * prefs.step[i];
      } else {
        state.r[i] = moves.next_value[i] - x[i];
        state.categorical_lock[i] = dir;
      }
      state.acted[i] = true;
      rec.acted[i] = 1;
    }
    rec.directions = moves.direction;
    rec.candidate = state.r;
    rec.marginal_costs = sw.marginal_costs;
    rec.weights = sw.weights;
    rec.prediction = model.predict_proba(add(x, state.r));
    const bool success = rec.prediction >= 0.5;
    traj.records.push_back(std::move(rec));
    if (success) {
      traj.t_hat = t;
      break;
    }
  }
  return traj;
}

Correction cost_correction(const Predictor& model, const DatasetSchema& schema,
                           std::span<const double> x, const Trajectory& trajectory,
                           const QuantileTable& q, const EngineConfig& cfg) {
  if (!trajectory.t_hat) throw InvalidArgument("cost_correction: trajectory has no success");
  const long t_hat = *trajectory.t_hat;
  const auto& final_candidate = trajectory.records.at(static_cast<std::size_t>(t_hat - 1)).candidate;

  std::vector<std::size_t> moved_categorical;
  for (const auto j : schema.actionable_categorical()) {
    if (final_candidate[j] != 0.0) moved_categorical.push_back(j);
  }
  Correction out{final_candidate, t_hat, false};
  if (moved_categorical.empty()) return out;

  auto overridden = [&](long t) {
    std::vector<double> r = t == 0 ? std::vector<double>(x.size(), 0.0)
                                   : trajectory.records[static_cast<std::size_t>(t - 1)].candidate;
    for (const auto j : moved_categorical) r[j] = final_candidate[j];
    return r;
  };

  long t = t_hat;
  std::vector<double> best = final_candidate;
  while (t > 0) {
    auto prev = overridden(t - 1);
    if (model.predict_label(add(x, prev)) != 1) break;
    best = std::move(prev);
    --t;
  }
  if (t == t_hat) return out;
  // A direction reversal in stage 1 could make an earlier candidate dearer.
  if (total_cost(q, schema, x, best, cfg.cost) > total_cost(q, schema, x, final_candidate, cfg.cost)) {
    return out;
  }
  return {std::move(best), t, true};
}

RecourseResult generate_recourse(const Predictor& model, const DatasetSchema& schema,
                                 std::span<const double> x, const PreferenceProfile& profile,
                                 const QuantileTable& q, const EngineConfig& cfg,
                                 std::uint64_t seed) {
  if (const auto violations = validate(profile, schema); !violations.empty()) {
    std::string msg = "invalid preferences:";
    for (const auto& v : violations) msg += " [" + v.field + "] " + v.message + ";";
    throw InvalidArgument(msg);
  }
  const auto start = std::chrono::steady_clock::now();
  Rng rng(seed);
  RecourseResult res;
  res.seed = seed;
  res.trajectory = run_stage1(model, schema, x, profile, q, cfg, rng);
  const auto& traj = res.trajectory;

  if (traj.t_hat) {
    res.stage1_action = traj.records.at(static_cast<std::size_t>(*traj.t_hat - 1)).candidate;
    const auto corr = cost_correction(model, schema, x, traj, q, cfg);
    res.final_action = corr.action;
    res.correction_step = corr.t;
    res.corrected = corr.applied;
    res.steps_used = *traj.t_hat;
  } else {
    res.stage1_action = traj.records.empty() ? std::vector<double>(x.size(), 0.0)
                                             : traj.records.back().candidate;
    res.final_action = res.stage1_action;
    res.steps_used = static_cast<long>(traj.records.size());
  }
  const auto reached = add(x, res.final_action);
  res.final_probability = model.predict_proba(reached);
  res.valid = traj.t_hat.has_value() && model.predict_label(reached) == 1;
  if (!traj.t_hat) {
    res.diagnostics = std::string(traj.support_exhausted ? "no admissible move left"
                                                         : "step budget exhausted") +
                      " after " + std::to_string(res.steps_used) +
                      " steps; final probability " + format_double(res.final_probability);
  }
  res.total_cost_before = total_cost(q, schema, x, res.stage1_action, cfg.cost);
  res.total_cost_after = total_cost(q, schema, x, res.final_action, cfg.cost);
  res.fractional_costs = fractional_costs(q, schema, x, res.final_action, cfg.cost);
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

nlohmann::json trace_to_json(const Trajectory& trajectory, const DatasetSchema& schema) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& rec : trajectory.records) {
    nlohmann::json acted = nlohmann::json::array();
    for (std::size_t i = 0; i < rec.acted.size(); ++i) {
      if (rec.acted[i]) acted.push_back(schema.feature(i).name);
    }
    nlohmann::json weights = nlohmann::json::object();
    nlohmann::json directions = nlohmann::json::object();
    for (const auto i : schema.actionable()) {
      weights[schema.feature(i).name] = rec.weights[i];
      directions[schema.feature(i).name] = rec.directions[i];
    }
    out.push_back({{"t", rec.t},
                   {"acted", std::move(acted)},
                   {"directions", std::move(directions)},
                   {"weights", std::move(weights)},
                   {"candidate", named(schema, rec.candidate)},
                   {"prediction", rec.prediction}});
  }
  return out;
}

nlohmann::json result_to_json(const RecourseResult& result, const DatasetSchema& schema,
                              bool include_timing, bool include_trace) {
  nlohmann::json j{{"method", result.method},
                   {"valid", result.valid},
                   {"seed", result.seed},
                   {"steps_used", result.steps_used},
                   {"correction_step", result.correction_step},
                   {"corrected", result.corrected},
                   {"stage1_action", named(schema, result.stage1_action)},
                   {"final_action", named(schema, result.final_action)},
                   {"total_cost_before", result.total_cost_before},
                   {"total_cost_after", result.total_cost_after},
                   {"final_probability", result.final_probability},
                   {"diagnostics", result.diagnostics}};
  j["fractional_costs"] = result.fractional_costs ? nlohmann::json(*result.fractional_costs)
                                                  : nlohmann::json(nullptr);
  if (include_timing) j["wall_time_s"] = result.wall_time_s;
  if (include_trace) j["trace"] = trace_to_json(result.trajectory, schema);
  return j;
}

}  // namespace upar
