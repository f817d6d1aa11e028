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

#include "upar/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "upar/error.hpp"
#include "upar/rng.hpp"

namespace upar {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Error tied to a config key so the loader can point at its line.
class KeyError : public InvalidArgument {
 public:
  KeyError(std::string key, const std::string& msg)
      : InvalidArgument(key + ": " + msg), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

template <typename T>
std::vector<T> non_empty_list(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) throw KeyError(key, "must be a non-empty array");
  try {
    return j.get<std::vector<T>>();
  } catch (const json::exception&) {
    throw KeyError(key, "has elements of the wrong type");
  }
}

// Integers built in code are signed even when non-negative, so accept both.
bool is_count(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

const std::set<std::string> kMethods{"upar", "growing_spheres", "wachter"};
const std::set<std::string> kTopKeys{
    "schema",  "dataset",         "model",   "quantile_population", "cost",        "engine",
    "baselines", "methods",       "method",  "preferences",         "sweep",       "seeds",
    "seed",    "max_individuals", "group_by", "threads",            "output_dir",  "actionable_order"};

}  // namespace

ExperimentConfig experiment_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw InvalidArgument("experiment config: expected an object");
  for (const auto& [key, v] : j.items()) {
    if (!kTopKeys.count(key)) throw KeyError(key, "unknown key");
  }
  ExperimentConfig c;
  c.base_dir = base_dir;
  for (const char* key : {"schema", "dataset", "model"}) {
    if (!j.contains(key)) throw KeyError(key, "required key is missing");
  }
  c.session = json::object();
  for (const char* key :
       {"schema", "dataset", "model", "quantile_population", "cost", "engine", "baselines"}) {
    if (j.contains(key)) c.session[key] = j.at(key);
  }

  if (j.contains("methods")) {
    c.methods = non_empty_list<std::string>(j.at("methods"), "methods");
  } else if (j.contains("method")) {
    if (!j.at("method").is_string()) throw KeyError("method", "must be a string");
    c.methods = {j.at("method").get<std::string>()};
  }
  for (const auto& m : c.methods) {
    if (!kMethods.count(m)) {
      throw KeyError("methods", "unknown method '" + m + "' (expected upar, growing_spheres or wachter)");
    }
  }

  if (j.contains("preferences")) {
    const auto& p = j.at("preferences");
    if (!p.is_object()) throw KeyError("preferences", "must be an object");
    for (const auto& [key, v] : p.items()) {
      if (key != "fixed" && key != "file" && key != "random") {
        throw KeyError("preferences", "unknown source '" + key + "' (expected fixed, file or random)");
      }
    }
    if (p.contains("fixed")) {
      const auto& f = p.at("fixed");
      c.fixed_preferences = f.is_string() ? read_json_file((base_dir / f.get<std::string>()).string()) : f;
    }
    if (p.contains("file")) {
      if (!p.at("file").is_string()) throw KeyError("file", "must be a path");
      const auto entries = read_json_file((base_dir / p.at("file").get<std::string>()).string());
      if (!entries.is_array()) throw KeyError("file", "must contain an array of {row, preferences}");
      for (const auto& e : entries) {
        if (!e.is_object() || !e.contains("row") || !e.contains("preferences")) {
          throw KeyError("file", "each entry needs 'row' and 'preferences'");
        }
        c.per_row_preferences[e.at("row").get<std::size_t>()] = e.at("preferences");
      }
    }
    if (p.contains("random")) {
      const auto& r = p.at("random");
      if (!r.is_object()) throw KeyError("random", "must be an object");
      RandomGammaSpec spec;
      spec.feature = r.value("feature", std::string());
      spec.candidates = non_empty_list<double>(r.value("candidates", json()), "candidates");
      for (const double g : spec.candidates) {
        if (!(g >= 0.0 && g <= 1.0)) throw KeyError("candidates", "values must lie in [0, 1]");
      }
      c.random_gamma = std::move(spec);
    }
  }

  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (!s.is_object()) throw KeyError("sweep", "must be an object");
    for (const auto& [key, v] : s.items()) {
      if (key != "tau" && key != "step_multipliers" && key != "actionable_subset_sizes") {
        throw KeyError(key, "unknown sweep axis");
      }
    }
    if (s.contains("tau")) {
      c.taus = non_empty_list<double>(s.at("tau"), "tau");
      for (const double t : c.taus) {
        if (!(t > 0.0)) throw KeyError("tau", "values must be > 0");
      }
    }
    if (s.contains("step_multipliers")) {
      c.step_multipliers = non_empty_list<double>(s.at("step_multipliers"), "step_multipliers");
      for (const double m : c.step_multipliers) {
        if (!(m > 0.0)) throw KeyError("step_multipliers", "values must be > 0");
      }
    }
    if (s.contains("actionable_subset_sizes")) {
      c.subset_sizes =
          non_empty_list<std::size_t>(s.at("actionable_subset_sizes"), "actionable_subset_sizes");
      for (const auto k : c.subset_sizes) {
        if (k == 0) throw KeyError("actionable_subset_sizes", "values must be >= 1");
      }
    }
  }
  if (j.contains("actionable_order")) {
    c.actionable_order = non_empty_list<std::string>(j.at("actionable_order"), "actionable_order");
  }
  if (j.contains("seeds")) {
    c.seeds = non_empty_list<std::uint64_t>(j.at("seeds"), "seeds");
  } else if (j.contains("seed")) {
    if (!is_count(j.at("seed"))) throw KeyError("seed", "must be a non-negative integer");
    c.seeds = {j.at("seed").get<std::uint64_t>()};
  }
  if (j.contains("max_individuals")) {
    if (!is_count(j.at("max_individuals"))) {
      throw KeyError("max_individuals", "must be a non-negative integer");
    }
    c.max_individuals = j.at("max_individuals").get<std::size_t>();
  }
  if (j.contains("group_by")) {
    if (!j.at("group_by").is_string()) throw KeyError("group_by", "must be a feature name");
    c.group_by = j.at("group_by").get<std::string>();
  }
  if (j.contains("threads")) {
    if (!is_count(j.at("threads")) || j.at("threads").get<std::size_t>() == 0) {
      throw KeyError("threads", "must be a positive integer");
    }
    c.threads = j.at("threads").get<std::size_t>();
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw KeyError("output_dir", "must be a path");
    c.output_dir = (base_dir / j.at("output_dir").get<std::string>()).string();
  }
  return c;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
  try {
    return experiment_from_json(j, fs::path(path).parent_path());
  } catch (const KeyError& e) {
    const auto pos = text.find("\"" + e.key() + "\"");
    if (pos == std::string::npos) throw InvalidArgument(path + ": " + e.what());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n');
    throw InvalidArgument(path + ":" + std::to_string(line) + ": " + e.what());
  }
}

std::uint64_t individual_seed(std::uint64_t seed, std::size_t row) {
  return Rng(seed).split(row).seed();
}

namespace {

// Fits a profile parsed for the full schema to a subset schema and applies
// the step multiplier and tau of a sweep point.
PreferenceProfile adapt_profile(PreferenceProfile p, const DatasetSchema& schema,
                                double step_multiplier, std::optional<double> tau) {
  std::map<std::string, double> gamma;
  for (const auto i : schema.actionable_continuous()) {
    const auto& name = schema.feature(i).name;
    const auto it = p.gamma.find(name);
    gamma[name] = it != p.gamma.end() ? it->second : 0.0;
  }
  double sum = 0.0;
  for (const auto& [name, g] : gamma) sum += g;
  if (sum > 0.0) {
    p.gamma = renormalize_gamma(gamma);
  } else {
    for (auto& [name, g] : gamma) g = 1.0 / static_cast<double>(gamma.size());
    p.gamma = gamma;
  }
  std::map<std::string, int> ranking;
  for (const auto i : schema.actionable_categorical()) {
    const auto& name = schema.feature(i).name;
    if (p.ranking.count(name)) ranking[name] = p.ranking.at(name);
  }
  p.ranking = std::move(ranking);
  for (const auto i : schema.actionable_continuous()) {
    const auto& f = schema.feature(i);
    const auto it = p.steps.find(f.name);
    p.steps[f.name] = (it != p.steps.end() ? it->second : f.default_step) * step_multiplier;
  }
  if (tau) p.tau = *tau;
  return p;
}

void apply_random_gamma(PreferenceProfile& p, const DatasetSchema& schema,
                        const RandomGammaSpec& spec, Rng& rng) {
  const auto con = schema.actionable_continuous();
  if (con.empty()) return;
  std::size_t target = con.front();
  if (!spec.feature.empty()) {
    const auto idx = schema.index_of(spec.feature);
    if (!idx || std::find(con.begin(), con.end(), *idx) == con.end()) return;
    target = *idx;
  }
  const double g = spec.candidates[rng.below(spec.candidates.size())];
  p.gamma.clear();
  for (const auto i : con) {
    p.gamma[schema.feature(i).name] =
        i == target ? (con.size() == 1 ? 1.0 : g)
                    : (1.0 - g) / static_cast<double>(con.size() - 1);
  }
}

std::vector<std::string> subset_names(const ExperimentConfig& c, const DatasetSchema& schema,
                                      std::size_t k) {
  std::vector<std::string> order = c.actionable_order;
  if (order.empty()) {
    for (const auto i : schema.actionable()) order.push_back(schema.feature(i).name);
  }
  if (k > order.size()) {
    throw KeyError("actionable_subset_sizes",
                   "size " + std::to_string(k) + " exceeds the " + std::to_string(order.size()) +
                       " actionable features");
  }
  return {order.begin(), order.begin() + static_cast<long>(k)};
}

std::map<std::string, double> gamma_of(const PreferenceProfile& p) { return p.gamma; }

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& c) {
  const Session base = open_session(c.session, c.base_dir);
  const auto& full = base.schema;
  ExperimentOutput out;
  out.warnings = base.warnings;

  for (const auto& name : c.actionable_order) {
    const auto idx = full.index_of(name);
    if (!idx || !full.feature(*idx).actionable) {
      throw KeyError("actionable_order", "'" + name + "' is not an actionable feature");
    }
  }
  std::optional<std::size_t> group_idx;
  if (!c.group_by.empty()) {
    group_idx = full.index_of(c.group_by);
    if (!group_idx) throw KeyError("group_by", "unknown feature '" + c.group_by + "'");
  }

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < base.dataset.size(); ++i) {
    if (base.model->predict_label(base.dataset.rows[i]) != 1) rows.push_back(i);
    if (c.max_individuals && rows.size() == c.max_individuals) break;
  }
  if (rows.empty()) throw PreconditionError("no negatively classified individual in the dataset");

  // Profiles parsed once against the full schema.
  const PreferenceProfile fixed = profile_from_json(c.fixed_preferences, full);
  std::map<std::size_t, PreferenceProfile> per_row;
  for (const auto& [row, pj] : c.per_row_preferences) per_row[row] = profile_from_json(pj, full);

  std::vector<std::size_t> sizes = c.subset_sizes;
  if (sizes.empty()) sizes.push_back(c.actionable_order.empty() ? full.actionable().size()
                                                                : c.actionable_order.size());
  std::vector<std::optional<double>> taus;
  for (const double t : c.taus) taus.emplace_back(t);
  if (taus.empty()) taus.emplace_back(std::nullopt);

  for (const auto k : sizes) {
    Session session = base;
    if (!c.subset_sizes.empty() || !c.actionable_order.empty()) {
      session.schema = full.with_actionable(subset_names(c, full, k));
    }
    for (const auto& method : c.methods) {
      for (const auto& tau : taus) {
        for (const double mult : c.step_multipliers) {
          for (const auto seed : c.seeds) {
            SweepPoint pt;
            pt.index = out.points.size();
            pt.method = method;
            pt.step_multiplier = mult;
            pt.subset_size = k;
            pt.seed = seed;
            pt.outcomes.resize(rows.size());
            std::atomic<std::size_t> next{0};
            std::exception_ptr failure;
            std::mutex failure_mu;
            auto work = [&] {
              for (std::size_t n = next++; n < rows.size(); n = next++) {
                try {
                  const std::size_t row = rows[n];
                  auto& o = pt.outcomes[n];
                  o.row = row;
                  o.x = base.dataset.rows[row];
                  PreferenceProfile p = per_row.count(row) ? per_row.at(row) : fixed;
                  if (c.random_gamma) {
                    Rng rng = Rng(seed).split(row).split(0x70726566);
                    apply_random_gamma(p, session.schema, *c.random_gamma, rng);
                  }
                  o.profile = adapt_profile(std::move(p), session.schema, mult, tau);
                  const auto v = validate(o.profile, session.schema);
                  if (!v.empty()) {
                    throw InvalidArgument("preferences for row " + std::to_string(row) + ": " +
                                          v.front().field + ": " + v.front().message);
                  }
                  o.result = run_method(session, method, o.x, o.profile, individual_seed(seed, row));
                  if (group_idx) o.group = format_double(o.x[*group_idx]);
                } catch (...) {
                  std::lock_guard<std::mutex> lock(failure_mu);
                  if (!failure) failure = std::current_exception();
                  next = rows.size();
                }
              }
            };
            const std::size_t nt = std::min(c.threads, rows.size());
            if (nt <= 1) {
              work();
            } else {
              std::vector<std::thread> pool;
              for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(work);
              for (auto& th : pool) th.join();
            }
            if (failure) std::rethrow_exception(failure);

            pt.tau = pt.outcomes.front().profile.tau;
            std::vector<Evaluated> items;
            double sum = 0.0, sum_sq = 0.0;
            std::size_t nvalid = 0;
            for (const auto& o : pt.outcomes) {
              items.push_back({o.result, o.x, gamma_of(o.profile), o.group});
              if (!o.result.valid) continue;
              ++nvalid;
              sum += o.result.total_cost_after;
              sum_sq += o.result.total_cost_after * o.result.total_cost_after;
            }
            pt.report = evaluate(*session.model, session.schema, items);
            if (nvalid > 0) {
              pt.mean_cost = sum / static_cast<double>(nvalid);
              const double var = nvalid > 1 ? (sum_sq - sum * pt.mean_cost) /
                                                  static_cast<double>(nvalid - 1)
                                            : 0.0;
              pt.sd_cost = std::sqrt(std::max(0.0, var));
            }
            out.points.push_back(std::move(pt));
          }
        }
      }
    }
  }
  if (!c.output_dir.empty()) write_outputs(out, base, c.output_dir);
  return out;
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot write " + p.string());
  return f;
}

std::string point_prefix(const SweepPoint& pt) {
  return std::to_string(pt.index) + "," + pt.method + "," + format_double(pt.tau) + "," +
         format_double(pt.step_multiplier) + "," + std::to_string(pt.subset_size) + "," +
         std::to_string(pt.seed);
}

const char* kPointHeader = "point,method,tau,step_multiplier,subset_size,seed";

std::string opt(const std::optional<std::map<std::string, double>>& m, const std::string& key) {
  if (!m || !m->count(key)) return "";
  return format_double(m->at(key));
}

std::string metrics_row(const SweepPoint& pt, const std::string& group, const MetricsReport& r,
                        double mean_cost, double sd_cost) {
  return point_prefix(pt) + "," + group + "," + std::to_string(r.attempts) + "," +
         std::to_string(r.successes) + "," + report_csv_row(r) + "," + format_double(mean_cost) +
         "," + format_double(sd_cost) + "\n";
}

}  // namespace

void write_outputs(const ExperimentOutput& out, const Session& session,
                   const std::string& output_dir) {
  const fs::path dir(output_dir);
  fs::create_directories(dir / "results");
  const auto& schema = session.schema;
  const auto con = schema.actionable_continuous();

  auto points = open_out(dir / "points.csv");
  points << kPointHeader << ",results_file\n";
  auto metrics = open_out(dir / "metrics.csv");
  metrics << kPointHeader << ",group,attempts,successes," << report_csv_header()
          << ",mean_cost,sd_cost\n";
  auto gamma_plot = open_out(dir / "plot_gamma_hat.csv");
  gamma_plot << kPointHeader << ",row,feature,gamma,gamma_hat\n";
  auto cost_plot = open_out(dir / "plot_cost.csv");
  cost_plot << kPointHeader << ",valid,mean_cost,sd_cost\n";

  for (const auto& pt : out.points) {
    char name[32];
    std::snprintf(name, sizeof name, "p%03zu_%s.csv", pt.index, pt.method.c_str());
    points << point_prefix(pt) << ",results/" << name << "\n";

    auto res = open_out(dir / "results" / name);
    res << "row,group,valid,steps_used,corrected,correction_step,cost_before,cost_after,"
           "final_probability,proximity,sparsity,redundancy,con_vio";
    for (const auto i : con) {
      res << ",gamma_" << schema.feature(i).name << ",gamma_hat_" << schema.feature(i).name;
    }
    for (const auto& f : schema.features()) res << ",r_" << f.name;
    res << ",diagnostics\n";
    for (const auto& o : pt.outcomes) {
      const auto& r = o.result;
      const auto& a = r.final_action;
      res << o.row << "," << o.group << "," << (r.valid ? 1 : 0) << "," << r.steps_used << ","
          << (r.corrected ? 1 : 0) << "," << r.correction_step << ","
          << format_double(r.total_cost_before) << "," << format_double(r.total_cost_after) << ","
          << format_double(r.final_probability) << "," << format_double(proximity(o.x, a, schema))
          << "," << sparsity(a) << "," << redundancy(*session.model, o.x, a) << ","
          << constraint_violations(a, schema);
      for (const auto i : con) {
        const auto& fname = schema.feature(i).name;
        const auto g = o.profile.gamma.find(fname);
        res << "," << (g != o.profile.gamma.end() ? format_double(g->second) : "") << ","
            << opt(r.fractional_costs, fname);
      }
      for (const double v : a) res << "," << format_double(v);
      // Diagnostics never contain commas or quotes.
      res << "," << r.diagnostics << "\n";

      if (r.valid && r.fractional_costs) {
        for (const auto& [fname, gh] : *r.fractional_costs) {
          const auto g = o.profile.gamma.find(fname);
          gamma_plot << point_prefix(pt) << "," << o.row << "," << fname << ","
                     << (g != o.profile.gamma.end() ? format_double(g->second) : "") << ","
                     << format_double(gh) << "\n";
        }
      }
    }

    metrics << metrics_row(pt, "all", pt.report, pt.mean_cost, pt.sd_cost);
    for (const auto& [key, sub] : pt.report.groups) {
      double sum = 0.0, sum_sq = 0.0;
      std::size_t n = 0;
      for (const auto& o : pt.outcomes) {
        if (o.group != key || !o.result.valid) continue;
        ++n;
        sum += o.result.total_cost_after;
        sum_sq += o.result.total_cost_after * o.result.total_cost_after;
      }
      const double mean = n ? sum / static_cast<double>(n) : 0.0;
      const double sd =
          n > 1 ? std::sqrt(std::max(0.0, (sum_sq - sum * mean) / static_cast<double>(n - 1))) : 0.0;
      metrics << metrics_row(pt, key, sub, mean, sd);
    }
    cost_plot << point_prefix(pt) << "," << pt.report.successes << ","
              << format_double(pt.mean_cost) << "," << format_double(pt.sd_cost) << "\n";
  }

  json summary = json::array();
  for (const auto& pt : out.points) {
    summary.push_back({{"point", pt.index},
                       {"method", pt.method},
                       {"tau", pt.tau},
                       {"step_multiplier", pt.step_multiplier},
                       {"subset_size", pt.subset_size},
                       {"seed", pt.seed},
                       {"mean_cost", pt.mean_cost},
                       {"sd_cost", pt.sd_cost},
                       {"metrics", report_to_json(pt.report)}});
  }
  auto s = open_out(dir / "summary.json");
  s << json{{"points", summary}, {"warnings", out.warnings}}.dump(2) << "\n";
}

}  // namespace upar
