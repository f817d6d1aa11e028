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

#include "upar/session.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "upar/cost.hpp"
#include "upar/error.hpp"

namespace upar {

namespace fs = std::filesystem;

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports "at line L, column C".
    throw InvalidArgument(path + ": " + e.what());
  }
}

namespace {

fs::path resolve_path(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument(std::string("key '") + key + "' has the wrong type");
  }
}

}  // namespace

EngineConfig engine_config_from_json(const nlohmann::json& j) {
  EngineConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw InvalidArgument("engine: expected an object");
  const std::string mode = get_or<std::string>(j, "z_cost", "cumulative");
  if (mode == "cumulative") {
    cfg.z_cost = ZCostMode::kCumulative;
  } else if (mode == "marginal") {
    cfg.z_cost = ZCostMode::kMarginal;
  } else {
    throw InvalidArgument("engine.z_cost: expected 'cumulative' or 'marginal', got '" + mode + "'");
  }
  return cfg;
}

namespace {

CostConfig cost_config_from_json(const nlohmann::json& j) {
  CostConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw InvalidArgument("cost: expected an object");
  cfg.epsilon_q = get_or<double>(j, "epsilon_q", cfg.epsilon_q);
  cfg.epsilon_c = get_or<double>(j, "epsilon_c", cfg.epsilon_c);
  if (!(cfg.epsilon_q > 0.0 && cfg.epsilon_q < 0.5)) {
    throw InvalidArgument("cost.epsilon_q: must lie in (0, 0.5)");
  }
  if (!(cfg.epsilon_c > 0.0)) throw InvalidArgument("cost.epsilon_c: must be > 0");
  return cfg;
}

}  // namespace

BaselineConfig baseline_config_from_json(const nlohmann::json& j) {
  BaselineConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw InvalidArgument("baselines: expected an object");
  if (j.contains("growing_spheres")) {
    const auto& g = j.at("growing_spheres");
    cfg.gs.initial_radius = get_or<double>(g, "initial_radius", cfg.gs.initial_radius);
    cfg.gs.growth = get_or<double>(g, "growth", cfg.gs.growth);
    cfg.gs.samples_per_shell = get_or<std::size_t>(g, "samples_per_shell", cfg.gs.samples_per_shell);
    cfg.gs.max_shells = get_or<std::size_t>(g, "max_shells", cfg.gs.max_shells);
  }
  if (j.contains("wachter")) {
    const auto& w = j.at("wachter");
    cfg.wachter.lambda = get_or<double>(w, "lambda", cfg.wachter.lambda);
    cfg.wachter.lambda_growth = get_or<double>(w, "lambda_growth", cfg.wachter.lambda_growth);
    cfg.wachter.lambda_rounds = get_or<std::size_t>(w, "lambda_rounds", cfg.wachter.lambda_rounds);
    cfg.wachter.lr = get_or<double>(w, "lr", cfg.wachter.lr);
    cfg.wachter.max_iterations =
        get_or<std::size_t>(w, "max_iterations", cfg.wachter.max_iterations);
    cfg.wachter.tolerance = get_or<double>(w, "tolerance", cfg.wachter.tolerance);
    cfg.wachter.target = get_or<double>(w, "target", cfg.wachter.target);
  }
  check_config(cfg);
  return cfg;
}

DatasetSchema schema_from_spec(const nlohmann::json& spec, const fs::path& base_dir) {
  if (spec.is_string()) {
    const auto path = resolve_path(base_dir, spec.get<std::string>());
    return schema_from_json(read_json_file(path.string()));
  }
  if (spec.is_object()) return schema_from_json(spec);
  throw InvalidArgument("schema: expected a path or an object");
}

Dataset dataset_from_spec(const nlohmann::json& spec, const DatasetSchema& schema,
                          const fs::path& base_dir) {
  if (spec.is_string()) {
    return load_csv(resolve_path(base_dir, spec.get<std::string>()).string(), schema);
  }
  if (!spec.is_object()) throw InvalidArgument("dataset: expected a path or an object");
  if (spec.contains("csv")) {
    return load_csv(resolve_path(base_dir, spec.at("csv").get<std::string>()).string(), schema);
  }
  if (spec.contains("synthetic")) {
    const auto& s = spec.at("synthetic");
    return generate_synthetic(get_or<std::uint64_t>(s, "seed", 1), get_or<std::size_t>(s, "n", 1000),
                              schema, get_or<double>(s, "separation", 0.05));
  }
  throw InvalidArgument("dataset: expected 'csv' or 'synthetic'");
}

std::unique_ptr<Predictor> train_from_spec(const nlohmann::json& spec, const Dataset& dataset) {
  const std::string type = get_or<std::string>(spec, "type", "linear");
  const auto seed = get_or<std::uint64_t>(spec, "seed", 0);
  if (type == "linear") {
    return std::make_unique<LinearModel>(
        train_logistic(dataset, get_or<double>(spec, "l2", 1e-4),
                       get_or<std::size_t>(spec, "epochs", 2000), get_or<double>(spec, "lr", 1.0),
                       seed));
  }
  if (type == "mlp") {
    const auto hidden =
        get_or<std::vector<std::size_t>>(spec, "hidden", std::vector<std::size_t>{18, 9, 3});
    const std::string act = get_or<std::string>(spec, "activation", "relu");
    if (act != "relu" && act != "tanh") {
      throw InvalidArgument("model.train.activation: expected 'relu' or 'tanh'");
    }
    return std::make_unique<MlpModel>(train_mlp(
        dataset, hidden, act == "relu" ? Activation::kRelu : Activation::kTanh,
        get_or<std::size_t>(spec, "epochs", 500), get_or<double>(spec, "lr", 0.01),
        get_or<double>(spec, "l2", 0.0), seed));
  }
  throw InvalidArgument("model.train.type: expected 'linear' or 'mlp', got '" + type + "'");
}

std::unique_ptr<Predictor> model_from_spec(const nlohmann::json& spec, const Dataset& dataset,
                                           const fs::path& base_dir) {
  std::unique_ptr<Predictor> model;
  if (spec.is_string()) {
    model = load_model(resolve_path(base_dir, spec.get<std::string>()).string());
  } else if (spec.is_object() && spec.contains("load")) {
    model = load_model(resolve_path(base_dir, spec.at("load").get<std::string>()).string());
  } else if (spec.is_object() && spec.contains("train")) {
    model = train_from_spec(spec.at("train"), dataset);
  } else if (spec.is_object() && spec.contains("type")) {
    model = model_from_json(spec);
  } else {
    throw InvalidArgument("model: expected a path, {\"load\"}, {\"train\"} or a model object");
  }
  check_model_schema(*model, dataset.schema);
  return model;
}

Session open_session(const nlohmann::json& config, const fs::path& base_dir) {
  if (!config.is_object()) throw InvalidArgument("session config: expected an object");
  for (const char* key : {"schema", "dataset", "model"}) {
    if (!config.contains(key)) throw InvalidArgument(std::string("session config: missing '") + key + "'");
  }
  Session s;
  s.schema = schema_from_spec(config.at("schema"), base_dir);
  s.dataset = dataset_from_spec(config.at("dataset"), s.schema, base_dir);
  s.model = model_from_spec(config.at("model"), s.dataset, base_dir);
  const std::string pop = get_or<std::string>(config, "quantile_population", "all");
  if (pop != "all" && pop != "positive") {
    throw InvalidArgument("quantile_population: expected 'all' or 'positive'");
  }
  s.quantiles = QuantileTable::build(
      s.dataset, pop == "all" ? QuantilePopulation::kAll : QuantilePopulation::kPositive);
  s.engine = engine_config_from_json(config.value("engine", nlohmann::json()));
  s.engine.cost = cost_config_from_json(config.value("cost", nlohmann::json()));
  s.baselines = baseline_config_from_json(config.value("baselines", nlohmann::json()));
  s.warnings = s.quantiles.warnings();
  for (const auto& d : s.dataset.diagnostics) s.warnings.push_back(d);
  return s;
}

Session open_session_file(const std::string& path) {
  const auto config = read_json_file(path);
  return open_session(config, fs::path(path).parent_path());
}

std::vector<double> instance_from_json(const nlohmann::json& j, const DatasetSchema& schema) {
  std::vector<double> x(schema.dim());
  if (j.is_array()) {
    if (j.size() != schema.dim()) {
      throw InvalidArgument("instance: expected " + std::to_string(schema.dim()) + " values, got " +
                            std::to_string(j.size()));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!j[i].is_number()) throw InvalidArgument("instance: non-numeric value");
      x[i] = j[i].get<double>();
    }
  } else if (j.is_object()) {
    for (const auto& [name, v] : j.items()) {
      if (!schema.index_of(name)) throw InvalidArgument("instance: unknown feature '" + name + "'");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto& f = schema.feature(i);
      if (!j.contains(f.name)) throw InvalidArgument("instance: missing feature '" + f.name + "'");
      if (!j.at(f.name).is_number()) {
        throw InvalidArgument("instance: feature '" + f.name + "' is not numeric");
      }
      x[i] = j.at(f.name).get<double>();
    }
  } else {
    throw InvalidArgument("instance: expected an object or an array");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& f = schema.feature(i);
    if (!std::isfinite(x[i])) throw InvalidArgument("instance: '" + f.name + "' is not finite");
    if (f.is_categorical() && !f.value_index(x[i])) {
      throw InvalidArgument("instance: '" + f.name + "' has a value outside its allowed set");
    }
    if (f.is_continuous() && (x[i] < f.domain_min || x[i] > f.domain_max)) {
      throw InvalidArgument("instance: '" + f.name + "' lies outside its domain");
    }
  }
  return x;
}

RecourseResult run_method(const Session& session, const std::string& method,
                          std::span<const double> x, const PreferenceProfile& profile,
                          std::uint64_t seed) {
  if (method == "upar") {
    return generate_recourse(*session.model, session.schema, x, profile, session.quantiles,
                             session.engine, seed);
  }
  RecourseResult res;
  if (method == "growing_spheres") {
    res = growing_spheres(*session.model, session.schema, x, session.baselines.gs, seed);
  } else if (method == "wachter") {
    res = wachter(*session.model, session.schema, x, session.baselines.wachter);
    res.seed = seed;
  } else {
    throw InvalidArgument("unknown method '" + method +
                          "' (expected upar, growing_spheres or wachter)");
  }
  attach_costs(res, session.quantiles, session.schema, x, session.engine.cost);
  return res;
}

nlohmann::json recourse_response(const Session& session, std::span<const double> x,
                                 const PreferenceProfile& profile, const RecourseResult& result,
                                 bool include_trace) {
  const auto& schema = session.schema;
  auto j = result_to_json(result, schema, false, include_trace);
  const auto& r = result.final_action;
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t i = 0; i < schema.dim(); ++i) {
    const auto& f = schema.feature(i);
    nlohmann::json row{{"feature", f.name},
                       {"actionable", f.actionable},
                       {"current", x[i]},
                       {"suggested", x[i] + r[i]},
                       {"change", r[i]},
                       {"cost", shift_cost(session.quantiles, i, x[i], r[i], session.engine.cost)}};
    const auto g = profile.gamma.find(f.name);
    row["gamma"] = g != profile.gamma.end() ? nlohmann::json(g->second) : nlohmann::json(nullptr);
    if (result.fractional_costs && result.fractional_costs->count(f.name)) {
      row["gamma_hat"] = result.fractional_costs->at(f.name);
    } else {
      row["gamma_hat"] = nullptr;
    }
    table.push_back(std::move(row));
  }
  j["features"] = std::move(table);
  j["gamma"] = profile.gamma;
  j["metrics"] = {{"proximity", proximity(x, r, schema)},
                  {"sparsity", sparsity(r)},
                  {"redundancy", redundancy(*session.model, x, r)},
                  {"con_vio", constraint_violations(r, schema)},
                  {"total_cost_before", result.total_cost_before},
                  {"total_cost_after", result.total_cost_after}};
  return j;
}

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string format_recourse(const Session& session, std::span<const double> x,
                            const PreferenceProfile& profile, const RecourseResult& result,
                            bool trace) {
  const auto& schema = session.schema;
  std::ostringstream out;
  out << "method: " << result.method << "  seed: " << result.seed
      << "  valid: " << (result.valid ? "yes" : "no") << "  steps: " << result.steps_used
      << "  P(+1): " << fixed(result.final_probability) << "\n";
  if (!result.diagnostics.empty()) out << "note: " << result.diagnostics << "\n";
  std::size_t w = 8;
  for (const auto& f : schema.features()) w = std::max(w, f.name.size() + 2);
  out << pad("feature", w) << pad("current", 14) << pad("suggested", 14) << pad("change", 12)
      << pad("cost", 10)
      << pad("gamma", 8) << "gamma_hat\n";
  for (std::size_t i = 0; i < schema.dim(); ++i) {
    const auto& f = schema.feature(i);
    const double r = result.final_action[i];
    const auto g = profile.gamma.find(f.name);
    std::string gh = "-";
    if (result.fractional_costs && result.fractional_costs->count(f.name)) {
      gh = fixed(result.fractional_costs->at(f.name), 3);
    }
    out << pad(f.name + (f.actionable ? "" : "*"), w) << pad(format_double(x[i]), 14)
        << pad(r == 0.0 ? "-" : format_double(x[i] + r), 14)
        << pad(r == 0.0 ? "-" : (r > 0 ? "+" : "") + format_double(r), 12)
        << pad(fixed(shift_cost(session.quantiles, i, x[i], r, session.engine.cost)), 10)
        << pad(g != profile.gamma.end() ? fixed(g->second, 3) : "-", 8) << gh << "\n";
  }
  out << "total cost: " << fixed(result.total_cost_after);
  if (result.corrected) {
    out << " (stage 1: " << fixed(result.total_cost_before) << ", corrected at step "
        << result.correction_step << ")";
  }
  out << "\n* not actionable\n";
  if (trace) {
    out << "trace:\n";
    for (const auto& rec : result.trajectory.records) {
      out << "  t=" << rec.t << " acted=[";
      bool first = true;
      for (std::size_t i = 0; i < rec.acted.size(); ++i) {
        if (!rec.acted[i]) continue;
        out << (first ? "" : ",") << schema.feature(i).name
            << (rec.directions[i] > 0 ? "+" : "-");
        first = false;
      }
      out << "] r=[";
      for (std::size_t i = 0; i < rec.candidate.size(); ++i) {
        out << (i ? "," : "") << format_double(rec.candidate[i]);
      }
      out << "] p=" << fixed(rec.prediction) << "\n";
    }
  }
  return out.str();
}

}  // namespace upar
