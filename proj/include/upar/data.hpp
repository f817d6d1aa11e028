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

#ifndef UPAR_DATA_HPP
#define UPAR_DATA_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace upar {

enum class FeatureKind { kContinuous, kCategorical };
enum class Monotonicity { kFree, kNonDecreasing, kNonIncreasing };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  bool actionable = false;
  Monotonicity monotonicity = Monotonicity::kFree;
  // Continuous only.
  double domain_min = 0.0;
  double domain_max = 1.0;
  double default_step = 0.01;
  // Categorical only; sorted ascending.
  std::vector<double> allowed_values;

  bool is_continuous() const { return kind == FeatureKind::kContinuous; }
  bool is_categorical() const { return kind == FeatureKind::kCategorical; }
  // Smallest / largest representable value for either kind.
  double lower() const;
  double upper() const;
  // Position of `v` in allowed_values, or nullopt.
  std::optional<std::size_t> value_index(double v) const;
  // Nearest allowed value (categorical) or clipped value (continuous).
  double snap(double v) const;
};

class DatasetSchema {
 public:
  DatasetSchema() = default;
  // Validates all invariants; throws InvalidArgument on violation.
  DatasetSchema(std::vector<FeatureSpec> features, std::string target_name,
                std::string positive_label);

  std::size_t dim() const { return features_.size(); }
  const std::vector<FeatureSpec>& features() const { return features_; }
  const FeatureSpec& feature(std::size_t i) const { return features_.at(i); }
  const std::string& target_name() const { return target_name_; }
  const std::string& positive_label() const { return positive_label_; }

  std::optional<std::size_t> index_of(const std::string& name) const;
  std::size_t require_index(const std::string& name) const;

  std::vector<std::size_t> actionable() const;
  std::vector<std::size_t> actionable_continuous() const;
  std::vector<std::size_t> actionable_categorical() const;

  // Copy with actionability restricted to the listed feature names.
  DatasetSchema with_actionable(const std::vector<std::string>& names) const;

 private:
  std::vector<FeatureSpec> features_;
  std::string target_name_;
  std::string positive_label_;
};

// Schema config: {"target", "positive_label", "features": [{"name", "kind",
// "actionable", "monotonicity", "min", "max", "step", "values"}]}.
DatasetSchema schema_from_json(const nlohmann::json& j);
nlohmann::json schema_to_json(const DatasetSchema& schema);
DatasetSchema load_schema(const std::string& path);

struct Dataset {
  DatasetSchema schema;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;  // -1 or +1
  std::size_t rejected_rows = 0;
  std::vector<std::string> diagnostics;

  std::size_t size() const { return rows.size(); }
};

// Parses a CSV with header row. Columns are matched by name; extra columns
// are ignored. Rows with unparseable cells or categorical values outside the
// allowed set are dropped and counted in `rejected_rows`. Continuous cells
// are clipped into the schema domain.
Dataset load_csv(const std::string& path, const DatasetSchema& schema);
Dataset parse_csv(const std::string& text, const DatasetSchema& schema);
// Writes features in schema order followed by the target column, using
// shortest round-trip number formatting.
void write_csv(const Dataset& dataset, const std::string& path);
std::string to_csv(const Dataset& dataset);

// Formats a double so that parsing it back yields the same bits.
std::string format_double(double v);

enum class QuantilePopulation { kAll, kPositive };

// Empirical percentile function Q_i per feature, midpoint rule for ties:
//   Q(v) = (#{s < v} + 0.5 * #{s == v}) / N
// Categorical features use the same rule over value frequencies.
class QuantileTable {
 public:
  QuantileTable() = default;

  static QuantileTable build(const Dataset& dataset,
                             QuantilePopulation population = QuantilePopulation::kAll);
  // One sorted sample column per feature.
  static QuantileTable from_samples(std::vector<std::vector<double>> columns);
  // Single categorical column from a value -> frequency table.
  static QuantileTable from_frequencies(
      const std::vector<std::pair<double, double>>& value_freq);

  double percentile(std::size_t feature, double value) const;
  std::size_t dim() const { return columns_.size(); }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  struct Column {
    // Sorted distinct values with their probability mass.
    std::vector<double> values;
    std::vector<double> mass;
    std::vector<double> cumulative_below;  // mass strictly below values[k]
  };
  static Column make_column(std::vector<double> samples);

  std::vector<Column> columns_;
  std::vector<std::string> warnings_;
};

// Linearly separable-with-margin two-class data; deterministic given seed.
// `separation` is the margin in min-max-scaled units (capped internally).
Dataset generate_synthetic(std::uint64_t seed, std::size_t n, const DatasetSchema& schema,
                           double separation);

double scale_value(const FeatureSpec& f, double v);
double unscale_value(const FeatureSpec& f, double s);
std::vector<double> min_max_scale(std::span<const double> x, const DatasetSchema& schema);
std::vector<double> min_max_unscale(std::span<const double> s, const DatasetSchema& schema);

const char* to_string(FeatureKind k);
const char* to_string(Monotonicity m);

}  // namespace upar

#endif  // UPAR_DATA_HPP
