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

#include "upar/preferences.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "upar/error.hpp"

namespace upar {

PreferenceProfile default_profile(const DatasetSchema& schema) {
  const auto actionable = schema.actionable();
  if (actionable.empty()) throw InvalidArgument("default_profile: no actionable features");
  PreferenceProfile p;
  const auto cont = schema.actionable_continuous();
  for (const auto i : cont) {
    p.gamma[schema.feature(i).name] = 1.0 / static_cast<double>(cont.size());
  }
  int rank = 1;
  for (const auto i : actionable) {
    const auto& f = schema.feature(i);
    p.bounds[f.name] = {f.lower(), f.upper()};
    if (f.is_continuous()) {
      p.steps[f.name] = f.default_step;
    } else {
      p.values[f.name] = f.allowed_values;
      p.ranking[f.name] = rank++;
    }
  }
  return p;
}

std::vector<Violation> validate(const PreferenceProfile& profile, const DatasetSchema& schema) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string msg) {
    out.push_back({std::move(field), std::move(msg)});
  };
  auto lookup = [&](const std::string& field, const std::string& name) -> const FeatureSpec* {
    const auto idx = schema.index_of(name);
    if (!idx) {
      add(field, "unknown feature '" + name + "'");
      return nullptr;
    }
    return &schema.feature(*idx);
  };

  double sum = 0.0;
  for (const auto& [name, g] : profile.gamma) {
    const FeatureSpec* f = lookup("gamma", name);
    if (!f) continue;
    if (!std::isfinite(g) || g < 0.0 || g > 1.0) {
      add("gamma", "score for '" + name + "' outside [0, 1]");
    }
    if (!f->actionable && g != 0.0) {
      add("gamma", "gamma must be 0 for non-actionable feature '" + name + "'");
    } else if (f->is_categorical() && g != 0.0) {
      add("gamma", "gamma applies to continuous features only ('" + name + "')");
    } else {
      sum += g;
    }
  }
  if (!schema.actionable_continuous().empty() && std::abs(sum - 1.0) > 1e-9) {
    add("gamma", "gamma sum != 1 (got " + format_double(sum) + ")");
  }

  for (const auto& [name, b] : profile.bounds) {
    const FeatureSpec* f = lookup("bounds", name);
    if (!f) continue;
    if (!(b.first <= b.second)) {
      add("bounds", "lower bound exceeds upper bound for '" + name + "'");
    } else if (std::max(b.first, f->lower()) > std::min(b.second, f->upper())) {
      add("bounds", "bounds for '" + name + "' do not intersect the feature domain");
    }
  }

  for (const auto& [name, s] : profile.steps) {
    const FeatureSpec* f = lookup("steps", name);
    if (!f) continue;
    if (!f->is_continuous()) {
      add("steps", "step size given for categorical feature '" + name + "'; use values");
    } else if (!(s > 0.0) || !std::isfinite(s)) {
      add("steps", "step for '" + name + "' must be positive");
    }
  }

  for (const auto& [name, vals] : profile.values) {
    const FeatureSpec* f = lookup("values", name);
    if (!f) continue;
    if (!f->is_categorical()) {
      add("values", "candidate values given for continuous feature '" + name + "'");
      continue;
    }
    if (vals.empty()) add("values", "no candidate values for '" + name + "'");
    std::set<double> seen;
    for (const double v : vals) {
      if (!f->value_index(v)) {
        add("values", "value " + format_double(v) + " not allowed for '" + name + "'");
      }
      if (!seen.insert(v).second) add("values", "duplicate candidate value for '" + name + "'");
    }
  }

  std::set<int> ranks;
  bool injective = true;
  for (const auto& [name, r] : profile.ranking) {
    const FeatureSpec* f = lookup("ranking", name);
    if (!f) continue;
    if (!f->actionable || !f->is_categorical()) {
      add("ranking", "'" + name + "' is not an actionable categorical feature");
    }
    if (r <= 0) add("ranking", "rank for '" + name + "' must be a positive integer");
    if (!ranks.insert(r).second) injective = false;
  }
  if (!injective) add("ranking", "ranking not injective");

  if (!(profile.tau > 0.0) || !std::isfinite(profile.tau)) add("tau", "tau must be > 0");
  if (profile.max_steps < 0) add("max_steps", "max_steps must be >= 0");
  return out;
}

std::vector<double> renormalize_gamma(const std::vector<double>& scores) {
  double sum = 0.0;
  for (const double s : scores) {
    if (s < 0.0 || !std::isfinite(s)) throw InvalidArgument("renormalize_gamma: negative score");
    sum += s;
  }
  if (!(sum > 0.0)) throw InvalidArgument("renormalize_gamma: all scores are zero");
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] / sum;
  return out;
}

std::map<std::string, double> renormalize_gamma(const std::map<std::string, double>& scores) {
  std::vector<double> v;
  for (const auto& [k, s] : scores) v.push_back(s);
  const auto n = renormalize_gamma(v);
  std::map<std::string, double> out;
  std::size_t k = 0;
  for (const auto& [name, s] : scores) out[name] = n[k++];
  return out;
}

ResolvedPreferences resolve(const PreferenceProfile& profile, const DatasetSchema& schema) {
  const std::size_t d = schema.dim();
  ResolvedPreferences r;
  r.gamma.assign(d, 0.0);
  r.lower.resize(d);
  r.upper.resize(d);
  r.step.assign(d, 0.0);
  r.candidates.resize(d);
  r.tau = profile.tau;
  r.max_steps = profile.max_steps;
  for (std::size_t i = 0; i < d; ++i) {
    const auto& f = schema.feature(i);
    r.lower[i] = f.lower();
    r.upper[i] = f.upper();
    if (const auto it = profile.bounds.find(f.name); it != profile.bounds.end()) {
      r.lower[i] = std::max(r.lower[i], it->second.first);
      r.upper[i] = std::min(r.upper[i], it->second.second);
    }
    if (f.is_continuous()) {
      const auto it = profile.steps.find(f.name);
      r.step[i] = it != profile.steps.end() ? it->second : f.default_step;
      if (f.actionable) {
        const auto g = profile.gamma.find(f.name);
        r.gamma[i] = g != profile.gamma.end() ? g->second : 0.0;
      }
    } else {
      const auto it = profile.values.find(f.name);
      r.candidates[i] = it != profile.values.end() ? it->second : f.allowed_values;
      std::sort(r.candidates[i].begin(), r.candidates[i].end());
    }
  }

  std::vector<std::pair<long, std::size_t>> ranked;
  std::vector<std::size_t> unranked;
  for (const auto i : schema.actionable_categorical()) {
    const auto it = profile.ranking.find(schema.feature(i).name);
    if (it == profile.ranking.end()) {
      unranked.push_back(i);
    } else {
      const long key = profile.rank_order == RankOrder::kAscending ? it->second : -it->second;
      ranked.emplace_back(key, i);
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [key, i] : ranked) r.rank_sequence.push_back(i);
  r.rank_sequence.insert(r.rank_sequence.end(), unranked.begin(), unranked.end());
  return r;
}

PreferenceProfile profile_from_json(const nlohmann::json& j, const DatasetSchema& schema) {
  PreferenceProfile p = default_profile(schema);
  if (j.is_null()) return p;
  if (!j.is_object()) throw InvalidArgument("preferences: expected an object");
  try {
    if (j.contains("gamma")) p.gamma = j["gamma"].get<std::map<std::string, double>>();
    if (j.contains("bounds")) {
      for (const auto& [name, b] : j["bounds"].items()) {
        const auto v = b.get<std::vector<double>>();
        if (v.size() != 2) throw InvalidArgument("preferences: bounds need [lower, upper]");
        p.bounds[name] = {v[0], v[1]};
      }
    }
    if (j.contains("steps")) {
      for (const auto& [name, s] : j["steps"].items()) p.steps[name] = s.get<double>();
    }
    if (j.contains("values")) {
      for (const auto& [name, v] : j["values"].items()) {
        p.values[name] = v.get<std::vector<double>>();
      }
    }
    if (j.contains("ranking")) p.ranking = j["ranking"].get<std::map<std::string, int>>();
    if (j.contains("tau")) p.tau = j["tau"].get<double>();
    if (j.contains("max_steps")) p.max_steps = j["max_steps"].get<long>();
    if (j.contains("rank_order")) {
      const auto order = j["rank_order"].get<std::string>();
      if (order == "ascending") {
        p.rank_order = RankOrder::kAscending;
      } else if (order == "descending") {
        p.rank_order = RankOrder::kDescending;
      } else {
        throw InvalidArgument("preferences: rank_order must be ascending or descending");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("preferences: ") + e.what());
  }
  return p;
}

nlohmann::json profile_to_json(const PreferenceProfile& p) {
  nlohmann::json bounds = nlohmann::json::object();
  for (const auto& [name, b] : p.bounds) bounds[name] = {b.first, b.second};
  return {{"gamma", p.gamma},
          {"bounds", std::move(bounds)},
          {"steps", p.steps},
          {"values", p.values},
          {"ranking", p.ranking},
          {"tau", p.tau},
          {"max_steps", p.max_steps},
          {"rank_order", p.rank_order == RankOrder::kAscending ? "ascending" : "descending"}};
}

nlohmann::json violations_to_json(const std::vector<Violation>& violations) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : violations) out.push_back({{"field", v.field}, {"message", v.message}});
  return out;
}

}  // namespace upar
