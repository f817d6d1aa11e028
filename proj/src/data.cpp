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

#include "upar/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "upar/error.hpp"
#include "upar/rng.hpp"

namespace upar {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == ',' && !quoted) {
      cells.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  cells.push_back(trim(line.substr(start)));
  return cells;
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

bool label_matches(std::string_view cell, const std::string& positive) {
  if (cell == positive) return true;
  const auto a = parse_double(cell);
  const auto b = parse_double(positive);
  return a && b && *a == *b;
}

std::string negative_label_for(const std::string& positive) {
  if (const auto p = parse_double(positive)) return *p == 0.0 ? "1" : "0";
  return "not_" + positive;
}

FeatureKind parse_kind(const std::string& s) {
  if (s == "continuous") return FeatureKind::kContinuous;
  if (s == "categorical" || s == "binary" || s == "ordinal") return FeatureKind::kCategorical;
  throw InvalidArgument("unknown feature kind '" + s + "'");
}

Monotonicity parse_monotonicity(const std::string& s) {
  if (s == "free") return Monotonicity::kFree;
  if (s == "non_decreasing") return Monotonicity::kNonDecreasing;
  if (s == "non_increasing") return Monotonicity::kNonIncreasing;
  throw InvalidArgument("unknown monotonicity '" + s + "'");
}

}  // namespace

const char* to_string(FeatureKind k) {
  return k == FeatureKind::kContinuous ? "continuous" : "categorical";
}

const char* to_string(Monotonicity m) {
  switch (m) {
    case Monotonicity::kFree:
      return "free";
    case Monotonicity::kNonDecreasing:
      return "non_decreasing";
    case Monotonicity::kNonIncreasing:
      return "non_increasing";
  }
  return "free";
}

double FeatureSpec::lower() const {
  return is_continuous() ? domain_min : allowed_values.front();
}

double FeatureSpec::upper() const {
  return is_continuous() ? domain_max : allowed_values.back();
}

std::optional<std::size_t> FeatureSpec::value_index(double v) const {
  const auto it = std::lower_bound(allowed_values.begin(), allowed_values.end(), v);
  if (it == allowed_values.end() || *it != v) return std::nullopt;
  return static_cast<std::size_t>(it - allowed_values.begin());
}

double FeatureSpec::snap(double v) const {
  if (is_continuous()) return std::clamp(v, domain_min, domain_max);
  double best = allowed_values.front();
  for (const double a : allowed_values) {
    if (std::abs(a - v) < std::abs(best - v)) best = a;
  }
  return best;
}

DatasetSchema::DatasetSchema(std::vector<FeatureSpec> features, std::string target_name,
                             std::string positive_label)
    : features_(std::move(features)),
      target_name_(std::move(target_name)),
      positive_label_(std::move(positive_label)) {
  std::set<std::string> names;
  bool any_actionable = false;
  for (auto& f : features_) {
    if (f.name.empty()) throw InvalidArgument("feature with empty name");
    if (!names.insert(f.name).second) {
      throw InvalidArgument("duplicate feature name '" + f.name + "'");
    }
    if (f.is_continuous()) {
      if (!(f.domain_min < f.domain_max)) {
        throw InvalidArgument("feature '" + f.name + "': min must be < max");
      }
      if (!(f.default_step > 0.0) || f.default_step > f.domain_max - f.domain_min) {
        throw InvalidArgument("feature '" + f.name + "': step must be in (0, max - min]");
      }
    } else {
      if (f.allowed_values.empty()) {
        throw InvalidArgument("feature '" + f.name + "': empty allowed values");
      }
      std::sort(f.allowed_values.begin(), f.allowed_values.end());
      if (std::adjacent_find(f.allowed_values.begin(), f.allowed_values.end()) !=
          f.allowed_values.end()) {
        throw InvalidArgument("feature '" + f.name + "': duplicate allowed values");
      }
    }
    any_actionable = any_actionable || f.actionable;
  }
  if (!any_actionable) throw InvalidArgument("schema has no actionable feature");
  if (names.count(target_name_)) {
    throw InvalidArgument("target '" + target_name_ + "' is also a feature");
  }
}

std::optional<std::size_t> DatasetSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t DatasetSchema::require_index(const std::string& name) const {
  if (const auto i = index_of(name)) return *i;
  throw InvalidArgument("unknown feature '" + name + "'");
}

std::vector<std::size_t> DatasetSchema::actionable() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].actionable) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> DatasetSchema::actionable_continuous() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].actionable && features_[i].is_continuous()) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> DatasetSchema::actionable_categorical() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].actionable && features_[i].is_categorical()) out.push_back(i);
  }
  return out;
}

DatasetSchema DatasetSchema::with_actionable(const std::vector<std::string>& names) const {
  std::vector<FeatureSpec> features = features_;
  for (auto& f : features) {
    f.actionable = std::find(names.begin(), names.end(), f.name) != names.end();
  }
  for (const auto& n : names) require_index(n);
  return DatasetSchema(std::move(features), target_name_, positive_label_);
}

DatasetSchema schema_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("features") || !j["features"].is_array()) {
    throw InvalidArgument("schema: expected object with 'features' array");
  }
  std::vector<FeatureSpec> features;
  for (const auto& jf : j["features"]) {
    FeatureSpec f;
    f.name = jf.at("name").get<std::string>();
    f.kind = parse_kind(jf.value("kind", std::string("continuous")));
    f.actionable = jf.value("actionable", false);
    f.monotonicity = parse_monotonicity(jf.value("monotonicity", std::string("free")));
    if (f.is_continuous()) {
      if (!jf.contains("min") || !jf.contains("max")) {
        throw InvalidArgument("feature '" + f.name + "': continuous needs min and max");
      }
      f.domain_min = jf["min"].get<double>();
      f.domain_max = jf["max"].get<double>();
      f.default_step = jf.contains("step") ? jf["step"].get<double>()
                                           : (f.domain_max - f.domain_min) / 100.0;
    } else if (jf.contains("values")) {
      f.allowed_values = jf["values"].get<std::vector<double>>();
    } else if (jf.value("kind", std::string()) == "binary") {
      f.allowed_values = {0.0, 1.0};
    } else {
      throw InvalidArgument("feature '" + f.name + "': categorical needs values");
    }
    features.push_back(std::move(f));
  }
  std::string positive = "1";
  if (j.contains("positive_label")) {
    const auto& p = j["positive_label"];
    positive = p.is_string() ? p.get<std::string>() : format_double(p.get<double>());
  }
  return DatasetSchema(std::move(features), j.value("target", std::string("label")),
                       positive);
}

nlohmann::json schema_to_json(const DatasetSchema& schema) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : schema.features()) {
    nlohmann::json jf{{"name", f.name},
                      {"kind", to_string(f.kind)},
                      {"actionable", f.actionable},
                      {"monotonicity", to_string(f.monotonicity)}};
    if (f.is_continuous()) {
      jf["min"] = f.domain_min;
      jf["max"] = f.domain_max;
      jf["step"] = f.default_step;
    } else {
      jf["values"] = f.allowed_values;
    }
    features.push_back(std::move(jf));
  }
  return {{"target", schema.target_name()},
          {"positive_label", schema.positive_label()},
          {"features", std::move(features)}};
}

DatasetSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema file '" + path + "'");
  try {
    return schema_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("schema file '" + path + "': " + e.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Dataset parse_csv(const std::string& text, const DatasetSchema& schema) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("csv: empty input");
  const auto header = split_csv_line(line);
  auto find_col = [&](const std::string& name) -> std::size_t {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return c;
    }
    throw IoError("csv: missing column '" + name + "'");
  };
  std::vector<std::size_t> cols;
  for (const auto& f : schema.features()) cols.push_back(find_col(f.name));
  const std::size_t target_col = find_col(schema.target_name());

  Dataset ds;
  ds.schema = schema;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    auto reject = [&](const std::string& why) {
      ++ds.rejected_rows;
      ds.diagnostics.push_back("line " + std::to_string(line_no) + ": " + why);
    };
    if (cells.size() < header.size()) {
      reject("too few cells");
      continue;
    }
    std::vector<double> row(schema.dim());
    bool ok = true;
    for (std::size_t i = 0; i < schema.dim() && ok; ++i) {
      const auto& f = schema.feature(i);
      const auto v = parse_double(cells[cols[i]]);
      if (!v) {
        reject("unparseable value for '" + f.name + "'");
        ok = false;
      } else if (f.is_categorical() && !f.value_index(*v)) {
        reject("value " + format_double(*v) + " not allowed for '" + f.name + "'");
        ok = false;
      } else {
        row[i] = f.is_continuous() ? std::clamp(*v, f.domain_min, f.domain_max) : *v;
      }
    }
    if (!ok) continue;
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(label_matches(cells[target_col], schema.positive_label()) ? 1 : -1);
  }
  return ds;
}

Dataset load_csv(const std::string& path, const DatasetSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open csv file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), schema);
}

std::string to_csv(const Dataset& dataset) {
  std::string out;
  for (const auto& f : dataset.schema.features()) out += f.name + ",";
  out += dataset.schema.target_name() + "\n";
  const std::string pos = dataset.schema.positive_label();
  const std::string neg = negative_label_for(pos);
  for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
    for (const double v : dataset.rows[r]) out += format_double(v) + ",";
    out += (dataset.labels[r] > 0 ? pos : neg) + "\n";
  }
  return out;
}

void write_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write csv file '" + path + "'");
  out << to_csv(dataset);
}

QuantileTable::Column QuantileTable::make_column(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  Column col;
  const double n = static_cast<double>(samples.size());
  double below = 0.0;
  for (std::size_t k = 0; k < samples.size();) {
    std::size_t e = k;
    while (e < samples.size() && samples[e] == samples[k]) ++e;
    col.values.push_back(samples[k]);
    col.mass.push_back(static_cast<double>(e - k) / n);
    col.cumulative_below.push_back(below / n);
    below += static_cast<double>(e - k);
    k = e;
  }
  return col;
}

QuantileTable QuantileTable::build(const Dataset& dataset, QuantilePopulation population) {
  std::vector<std::vector<double>> columns(dataset.schema.dim());
  for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
    if (population == QuantilePopulation::kPositive && dataset.labels[r] <= 0) continue;
    for (std::size_t i = 0; i < columns.size(); ++i) columns[i].push_back(dataset.rows[r][i]);
  }
  if (columns.empty() || columns.front().size() < 2) {
    throw InvalidArgument("quantile table needs at least 2 rows in the selected population");
  }
  QuantileTable table = from_samples(std::move(columns));
  for (std::size_t i = 0; i < table.columns_.size(); ++i) {
    if (table.columns_[i].values.size() == 1) {
      table.warnings_.push_back("feature '" + dataset.schema.feature(i).name +
                                "' is constant; its percentile is degenerate");
    }
  }
  return table;
}

QuantileTable QuantileTable::from_samples(std::vector<std::vector<double>> columns) {
  QuantileTable table;
  for (auto& c : columns) {
    if (c.empty()) throw InvalidArgument("quantile column without samples");
    table.columns_.push_back(make_column(std::move(c)));
  }
  return table;
}

QuantileTable QuantileTable::from_frequencies(
    const std::vector<std::pair<double, double>>& value_freq) {
  auto sorted = value_freq;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (const auto& [v, f] : sorted) {
    if (f < 0.0) throw InvalidArgument("negative frequency");
    total += f;
  }
  if (!(total > 0.0)) throw InvalidArgument("frequencies sum to zero");
  Column col;
  double below = 0.0;
  for (const auto& [v, f] : sorted) {
    col.values.push_back(v);
    col.mass.push_back(f / total);
    col.cumulative_below.push_back(below / total);
    below += f;
  }
  QuantileTable table;
  table.columns_.push_back(std::move(col));
  return table;
}

double QuantileTable::percentile(std::size_t feature, double value) const {
  const Column& col = columns_.at(feature);
  const auto it = std::lower_bound(col.values.begin(), col.values.end(), value);
  if (it == col.values.end()) return 1.0;
  const auto k = static_cast<std::size_t>(it - col.values.begin());
  double q = col.cumulative_below[k];
  if (*it == value) q += 0.5 * col.mass[k];
  return std::clamp(q, 0.0, 1.0);
}

double scale_value(const FeatureSpec& f, double v) {
  if (f.is_continuous()) {
    const double width = f.domain_max - f.domain_min;
    return width > 0.0 ? (v - f.domain_min) / width : 0.0;
  }
  const auto& vals = f.allowed_values;
  if (vals.size() < 2) return 0.0;
  const double denom = static_cast<double>(vals.size() - 1);
  if (v <= vals.front()) return 0.0;
  if (v >= vals.back()) return 1.0;
  const auto it = std::upper_bound(vals.begin(), vals.end(), v);
  const auto k = static_cast<std::size_t>(it - vals.begin()) - 1;
  const double frac = (v - vals[k]) / (vals[k + 1] - vals[k]);
  return (static_cast<double>(k) + frac) / denom;
}

double unscale_value(const FeatureSpec& f, double s) {
  if (f.is_continuous()) return f.domain_min + s * (f.domain_max - f.domain_min);
  const auto& vals = f.allowed_values;
  if (vals.size() < 2) return vals.front();
  const double pos = std::clamp(s, 0.0, 1.0) * static_cast<double>(vals.size() - 1);
  const auto k = std::min(static_cast<std::size_t>(pos), vals.size() - 2);
  const double frac = pos - static_cast<double>(k);
  return vals[k] + frac * (vals[k + 1] - vals[k]);
}

std::vector<double> min_max_scale(std::span<const double> x, const DatasetSchema& schema) {
  if (x.size() != schema.dim()) throw InvalidArgument("min_max_scale: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale_value(schema.feature(i), x[i]);
  return out;
}

std::vector<double> min_max_unscale(std::span<const double> s, const DatasetSchema& schema) {
  if (s.size() != schema.dim()) throw InvalidArgument("min_max_unscale: dimension mismatch");
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = unscale_value(schema.feature(i), s[i]);
  return out;
}

Dataset generate_synthetic(std::uint64_t seed, std::size_t n, const DatasetSchema& schema,
                           double separation) {
  if (n < 10) throw InvalidArgument("generate_synthetic: n must be >= 10");
  Rng rng(seed);
  const std::size_t d = schema.dim();

  // Hidden linear rule in scaled space: s(u) = w . (u - 0.5), |w|_1 = 1.
  std::vector<double> w(d);
  for (auto& wi : w) wi = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.5 + rng.uniform());
  const double l1 = std::accumulate(w.begin(), w.end(), 0.0,
                                    [](double a, double b) { return a + std::abs(b); });
  for (auto& wi : w) wi /= l1;
  double cont_norm2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (schema.feature(i).is_continuous()) cont_norm2 += w[i] * w[i];
  }
  const double margin = std::clamp(separation, 0.0, 0.2);

  auto score = [&](const std::vector<double>& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += w[i] * (u[i] - 0.5);
    return s;
  };

  Dataset ds;
  ds.schema = schema;
  for (std::size_t k = 0; k < n; ++k) {
    const int cls = (k % 2 == 0) ? 1 : -1;
    std::vector<double> u(d);
    bool accepted = false;
    for (int attempt = 0; attempt < 10000 && !accepted; ++attempt) {
      for (std::size_t i = 0; i < d; ++i) {
        const auto& f = schema.feature(i);
        if (f.is_continuous()) {
          u[i] = rng.uniform();
        } else {
          const auto idx = rng.below(f.allowed_values.size());
          u[i] = scale_value(f, f.allowed_values[idx]);
        }
      }
      double s = score(u);
      if (cls * s < margin && cont_norm2 > 0.0) {
        // Push continuous coordinates along the rule normal, then clip.
        const double need = (margin - cls * s) * 1.05;
        for (std::size_t i = 0; i < d; ++i) {
          if (schema.feature(i).is_continuous()) {
            u[i] = std::clamp(u[i] + cls * w[i] * need / cont_norm2, 0.0, 1.0);
          }
        }
        s = score(u);
      }
      accepted = cls * s >= margin;
    }
    if (!accepted) {
      throw InvalidArgument("generate_synthetic: cannot realise requested separation");
    }
    std::vector<double> row(d);
    for (std::size_t i = 0; i < d; ++i) {
      const auto& f = schema.feature(i);
      row[i] = f.is_continuous() ? unscale_value(f, u[i]) : f.snap(unscale_value(f, u[i]));
    }
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(cls);
  }
  return ds;
}

}  // namespace upar
