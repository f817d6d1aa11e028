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

#include "upar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "upar/cost.hpp"
#include "upar/error.hpp"

namespace upar {

double success_rate(std::span<const RecourseResult> results) {
  if (results.empty()) throw InvalidArgument("success_rate: no results");
  const auto valid = std::count_if(results.begin(), results.end(),
                                   [](const RecourseResult& r) { return r.valid; });
  return static_cast<double>(valid) / static_cast<double>(results.size());
}

std::size_t constraint_violations(std::span<const double> r, const DatasetSchema& schema) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] != 0.0 && !schema.feature(i).actionable) ++n;
  }
  return n;
}

std::size_t redundancy(const Predictor& model, std::span<const double> x,
                       std::span<const double> r) {
  std::vector<double> point(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) point[i] = x[i] + r[i];
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (r[i] == 0.0) continue;
    const double moved = point[i];
    point[i] = x[i];
    if (model.predict_label(point) == 1) ++n;
    point[i] = moved;
  }
  return n;
}

double proximity(std::span<const double> x, std::span<const double> r,
                 const DatasetSchema& schema) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& f = schema.feature(i);
    const double diff = scale_value(f, x[i] + r[i]) - scale_value(f, x[i]);
    s += diff * diff;
  }
  return std::sqrt(s);
}

std::size_t sparsity(std::span<const double> r) {
  return static_cast<std::size_t>(
      std::count_if(r.begin(), r.end(), [](double v) { return v != 0.0; }));
}

PrmseReport prmse(const std::vector<std::optional<std::map<std::string, double>>>& observed,
                  const std::vector<std::map<std::string, double>>& requested) {
  if (observed.size() != requested.size()) {
    throw InvalidArgument("prmse: observed and requested sizes differ");
  }
  std::set<std::string> features;
  for (const auto& g : requested) {
    for (const auto& [name, v] : g) features.insert(name);
  }
  PrmseReport rep;
  std::map<std::string, double> sq;
  for (std::size_t j = 0; j < observed.size(); ++j) {
    if (!observed[j]) {
      ++rep.excluded;
      continue;
    }
    ++rep.included;
    for (const auto& name : features) {
      const auto o = observed[j]->find(name);
      const auto r = requested[j].find(name);
      const double err = (o != observed[j]->end() ? o->second : 0.0) -
                         (r != requested[j].end() ? r->second : 0.0);
      sq[name] += err * err;
    }
  }
  if (rep.included == 0) throw InvalidArgument("prmse: every individual was excluded");
  double sum = 0.0;
  for (const auto& name : features) {
    rep.per_feature[name] = std::sqrt(sq[name] / static_cast<double>(rep.included));
    sum += rep.per_feature[name];
  }
  rep.prmse = features.empty() ? 0.0 : sum / static_cast<double>(features.size());
  return rep;
}

namespace {

MetricsReport evaluate_flat(const Predictor& model, const DatasetSchema& schema,
                            std::span<const Evaluated> items) {
  MetricsReport rep;
  rep.attempts = items.size();
  std::vector<std::optional<std::map<std::string, double>>> observed;
  std::vector<std::map<std::string, double>> requested;
  for (const auto& it : items) {
    if (!it.result.valid) continue;
    ++rep.successes;
    const auto& r = it.result.final_action;
    rep.avg_time_s += it.result.wall_time_s;
    rep.constraint_violations += static_cast<double>(constraint_violations(r, schema));
    rep.redundancy += static_cast<double>(redundancy(model, it.x, r));
    rep.proximity += proximity(it.x, r, schema);
    rep.sparsity += static_cast<double>(sparsity(r));
    observed.push_back(it.result.fractional_costs);
    requested.push_back(it.gamma);
  }
  rep.success_rate = rep.attempts == 0
                         ? 0.0
                         : static_cast<double>(rep.successes) / static_cast<double>(rep.attempts);
  if (rep.successes > 0) {
    const double n = static_cast<double>(rep.successes);
    rep.avg_time_s /= n;
    rep.constraint_violations /= n;
    rep.redundancy /= n;
    rep.proximity /= n;
    rep.sparsity /= n;
    const bool any = std::any_of(observed.begin(), observed.end(),
                                 [](const auto& o) { return o.has_value(); });
    if (any) rep.prmse = prmse(observed, requested);
  }
  return rep;
}

}  // namespace

std::map<std::string, MetricsReport> grouped(const Predictor& model, const DatasetSchema& schema,
                                             std::span<const Evaluated> items) {
  if (items.empty()) throw InvalidArgument("grouped: no results");
  std::map<std::string, std::vector<Evaluated>> buckets;
  for (const auto& it : items) buckets[it.group].push_back(it);
  std::map<std::string, MetricsReport> out;
  for (const auto& [key, bucket] : buckets) out[key] = evaluate_flat(model, schema, bucket);
  return out;
}

MetricsReport evaluate(const Predictor& model, const DatasetSchema& schema,
                       std::span<const Evaluated> items) {
  MetricsReport rep = evaluate_flat(model, schema, items);
  const bool has_groups = std::any_of(items.begin(), items.end(),
                                      [](const Evaluated& e) { return !e.group.empty(); });
  if (has_groups) rep.groups = grouped(model, schema, items);
  return rep;
}

LemmaCheck lemma_bound_check(const std::vector<Trajectory>& trajectories,
                             std::span<const double> x, const PreferenceProfile& profile,
                             const DatasetSchema& schema, const QuantileTable& q,
                             const CostConfig& cfg) {
  const auto prefs = resolve(profile, schema);
  const auto actionable = schema.actionable();
  const std::size_t d = schema.dim();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> c_min(d, kInf), c_max(d, 0.0);
  std::vector<double> sum(d, 0.0), sum_sq(d, 0.0);
  LemmaCheck out;
  const double n = static_cast<double>(std::max<std::size_t>(trajectories.size(), 1));

  double total_sum = 0.0;
  for (const auto& traj : trajectories) {
    out.t_star = std::max(out.t_star, static_cast<long>(traj.records.size()));
    for (const auto& rec : traj.records) {
      for (const auto i : actionable) {
        const double c = rec.marginal_costs[i];
        if (rec.directions[i] == 0 || !(c > 0.0)) continue;
        c_min[i] = std::min(c_min[i], c);
        c_max[i] = std::max(c_max[i], c);
      }
    }
    const std::vector<double> zero(d, 0.0);
    const auto& r = traj.records.empty() ? zero : traj.records.back().candidate;
    for (const auto i : actionable) {
      const double c = shift_cost(q, i, x[i], r[i], cfg);
      sum[i] += c;
      sum_sq[i] += c * c;
      total_sum += c;
    }
  }

  auto score = [&](std::size_t i, double c) {
    return (schema.feature(i).is_categorical() ? 1.0 : prefs.gamma[i]) / c;
  };
  for (const auto i : actionable) {
    LemmaFeatureCheck fc;
    fc.feature = schema.feature(i).name;
    fc.mean_cost = sum[i] / n;
    const double var = std::max(0.0, sum_sq[i] / n - fc.mean_cost * fc.mean_cost);
    fc.std_error = std::sqrt(var / n);
    if (c_max[i] > 0.0) {
      fc.c_min = c_min[i];
      fc.c_max = c_max[i];
      // Softmax of feature i at its largest possible score against every
      // other observed feature at its smallest.
      std::vector<double> z;
      std::vector<bool> eligible;
      std::size_t self = 0;
      for (const auto j : actionable) {
        if (!(c_max[j] > 0.0)) continue;
        if (j == i) self = z.size();
        z.push_back(j == i ? score(j, c_min[j]) : score(j, c_max[j]));
        eligible.push_back(true);
      }
      fc.sigma = softmax_weights(z, eligible, prefs.tau)[self];
      fc.bound = static_cast<double>(out.t_star) * fc.sigma * fc.c_max;
    }
    fc.satisfied = fc.mean_cost <= fc.bound;
    out.total_bound += fc.bound;
    out.features.push_back(std::move(fc));
  }
  out.total_mean_cost = total_sum / n;
  out.total_satisfied = out.total_mean_cost <= out.total_bound;
  return out;
}

nlohmann::json report_to_json(const MetricsReport& report) {
  nlohmann::json j{{"attempts", report.attempts},
                   {"successes", report.successes},
                   {"success_rate", report.success_rate},
                   {"avg_time_s", report.avg_time_s},
                   {"con_vio", report.constraint_violations},
                   {"redundancy", report.redundancy},
                   {"proximity", report.proximity},
                   {"sparsity", report.sparsity}};
  if (report.prmse) {
    j["prmse"] = report.prmse->prmse;
    j["prmse_per_feature"] = report.prmse->per_feature;
    j["prmse_excluded"] = report.prmse->excluded;
  } else {
    j["prmse"] = nullptr;
  }
  if (!report.groups.empty()) {
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [key, sub] : report.groups) groups[key] = report_to_json(sub);
    j["groups"] = std::move(groups);
  }
  return j;
}

std::string report_csv_header() {
  return "success_rate,prmse,avg_time_s,con_vio,redundancy,proximity,sparsity";
}

std::string report_csv_row(const MetricsReport& report) {
  return format_double(report.success_rate) + "," +
         (report.prmse ? format_double(report.prmse->prmse) : std::string("nan")) + "," +
         format_double(report.avg_time_s) + "," + format_double(report.constraint_violations) +
         "," + format_double(report.redundancy) + "," + format_double(report.proximity) + "," +
         format_double(report.sparsity);
}

}  // namespace upar
