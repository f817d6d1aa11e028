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

#include "upar/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "upar/error.hpp"
#include "upar/rng.hpp"

namespace upar {

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Raw point for a scaled point, with categorical features snapped.
std::vector<double> materialise(std::span<const double> scaled, const DatasetSchema& schema) {
  auto raw = min_max_unscale(scaled, schema);
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = schema.feature(i).snap(raw[i]);
  return raw;
}

// d raw / d scaled for the piecewise-linear unscaling.
double unscale_slope(const FeatureSpec& f, double s) {
  if (f.is_continuous()) return f.domain_max - f.domain_min;
  const auto& vals = f.allowed_values;
  if (vals.size() < 2) return 0.0;
  const double pos = std::clamp(s, 0.0, 1.0) * static_cast<double>(vals.size() - 1);
  const auto k = std::min(static_cast<std::size_t>(pos), vals.size() - 2);
  return (vals[k + 1] - vals[k]) * static_cast<double>(vals.size() - 1);
}

void require_negative(const Predictor& model, const DatasetSchema& schema,
                      std::span<const double> x) {
  check_model_schema(model, schema);
  if (x.size() != schema.dim()) throw InvalidArgument("instance dimension mismatch");
  if (model.predict_label(x) == 1) {
    throw PreconditionError("instance is already classified favourably");
  }
}

void finish(RecourseResult& res, const Predictor& model, std::span<const double> x,
            const std::vector<double>& point) {
  res.final_action.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) res.final_action[i] = point[i] - x[i];
  res.stage1_action = res.final_action;
  res.final_probability = model.predict_proba(point);
  res.valid = model.predict_label(point) == 1;
}

}  // namespace

void check_config(const BaselineConfig& cfg) {
  const auto& gs = cfg.gs;
  if (!(gs.initial_radius > 0.0) || !(gs.growth > 1.0)) {
    throw InvalidArgument("growing spheres: radius must be > 0 and growth > 1");
  }
  const auto& w = cfg.wachter;
  if (!(w.lambda > 0.0) || !(w.lambda_growth > 1.0) || !(w.lr > 0.0) || !(w.tolerance > 0.0)) {
    throw InvalidArgument("wachter: lambda, lr, tolerance must be > 0 and growth > 1");
  }
}

RecourseResult growing_spheres(const Predictor& model, const DatasetSchema& schema,
                               std::span<const double> x, const GrowingSpheresConfig& cfg,
                               std::uint64_t seed) {
  require_negative(model, schema, x);
  const auto start = std::chrono::steady_clock::now();
  RecourseResult res;
  res.method = "growing_spheres";
  res.seed = seed;
  const std::size_t d = schema.dim();
  const auto origin = min_max_scale(x, schema);
  const Rng root(seed);

  std::optional<std::vector<double>> best;
  double best_dist = 0.0;
  double inner = 0.0;
  double outer = cfg.initial_radius;
  std::size_t shell = 0;
  for (; shell < cfg.max_shells && !best; ++shell) {
    const Rng shell_rng = root.split(shell);
    const double inner_d = std::pow(inner, static_cast<double>(d));
    const double outer_d = std::pow(outer, static_cast<double>(d));
    for (std::size_t k = 0; k < cfg.samples_per_shell; ++k) {
      Rng rng = shell_rng.split(k);
      std::vector<double> dir(d);
      double norm = 0.0;
      while (norm == 0.0) {
        norm = 0.0;
        for (auto& v : dir) {
          v = rng.normal();
          norm += v * v;
        }
        norm = std::sqrt(norm);
      }
      const double radius =
          std::pow(inner_d + rng.uniform() * (outer_d - inner_d), 1.0 / static_cast<double>(d));
      std::vector<double> scaled(d);
      for (std::size_t i = 0; i < d; ++i) {
        scaled[i] = std::clamp(origin[i] + radius * dir[i] / norm, 0.0, 1.0);
      }
      auto point = materialise(scaled, schema);
      if (model.predict_label(point) != 1) continue;
      const double dist = distance(min_max_scale(point, schema), origin);
      if (!best || dist < best_dist) {
        best_dist = dist;
        best = std::move(point);
      }
    }
    inner = outer;
    outer *= cfg.growth;
  }
  res.steps_used = static_cast<long>(shell);
  if (best) {
    finish(res, model, x, *best);
  } else {
    finish(res, model, x, std::vector<double>(x.begin(), x.end()));
    res.valid = false;
    res.diagnostics = "no counterfactual within " + std::to_string(cfg.max_shells) + " shells";
  }
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

RecourseResult wachter(const Predictor& model, const DatasetSchema& schema,
                       std::span<const double> x, const WachterConfig& cfg) {
  require_negative(model, schema, x);
  const auto start = std::chrono::steady_clock::now();
  RecourseResult res;
  res.method = "wachter";
  const std::size_t d = schema.dim();
  const auto origin = min_max_scale(x, schema);
  std::vector<double> s = origin;

  auto objective = [&](const std::vector<double>& sv, double lambda) {
    const double p = model.predict_proba(min_max_unscale(sv, schema));
    return lambda * (p - cfg.target) * (p - cfg.target) + distance(sv, origin);
  };

  double lambda = cfg.lambda;
  long iterations = 0;
  // Categorical coordinates are frozen at their snapped values once a round
  // fails only because of snapping.
  std::vector<bool> frozen(d, false);
  for (std::size_t round = 0; round < cfg.lambda_rounds; ++round) {
    double eta = cfg.lr;
    double f = objective(s, lambda);
    for (std::size_t it = 0; it < cfg.max_iterations && eta > cfg.tolerance; ++it) {
      ++iterations;
      const auto raw = min_max_unscale(s, schema);
      const double p = model.predict_proba(raw);
      const auto sens = model.sensitivity(raw);
      const double dist = distance(s, origin);
      std::vector<double> g(d);
      double gnorm = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        if (frozen[i]) continue;
        const double dp = sens[i] * unscale_slope(schema.feature(i), s[i]);
        g[i] = 2.0 * lambda * (p - cfg.target) * dp + (dist > 0.0 ? (s[i] - origin[i]) / dist : 0.0);
        gnorm += g[i] * g[i];
      }
      gnorm = std::sqrt(gnorm);
      if (gnorm == 0.0) break;
      // Step of length at most eta; shrink on failure, grow on success.
      const double scale = eta / std::max(gnorm, 1.0);
      std::vector<double> trial(d);
      for (std::size_t i = 0; i < d; ++i) trial[i] = std::clamp(s[i] - scale * g[i], 0.0, 1.0);
      const double f_trial = objective(trial, lambda);
      if (f_trial < f) {
        s = std::move(trial);
        f = f_trial;
        eta = std::min(cfg.lr, eta * 1.2);
      } else {
        eta *= 0.5;
      }
    }
    const auto point = materialise(s, schema);
    if (model.predict_label(point) == 1) {
      finish(res, model, x, point);
      res.steps_used = iterations;
      res.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return res;
    }
    const bool relaxed_ok = model.predict_label(min_max_unscale(s, schema)) == 1;
    const auto snapped = min_max_scale(point, schema);
    for (std::size_t i = 0; i < d && relaxed_ok; ++i) {
      if (schema.feature(i).is_categorical()) {
        s[i] = snapped[i];
        frozen[i] = true;
      }
    }
    lambda *= cfg.lambda_growth;
  }
  finish(res, model, x, materialise(s, schema));
  res.valid = false;
  res.steps_used = iterations;
  res.diagnostics = "no valid counterfactual after " + std::to_string(cfg.lambda_rounds) +
                    " lambda rounds";
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

void attach_costs(RecourseResult& result, const QuantileTable& q, const DatasetSchema& schema,
                  std::span<const double> x, const CostConfig& cfg) {
  double total = 0.0;
  for (std::size_t i = 0; i < schema.dim(); ++i) {
    total += shift_cost(q, i, x[i], result.final_action[i], cfg);
  }
  result.total_cost_before = total;
  result.total_cost_after = total;
  result.fractional_costs = fractional_costs(q, schema, x, result.final_action, cfg);
}

}  // namespace upar
