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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "upar/data.hpp"
#include "upar/error.hpp"
#include "upar/model.hpp"
#include "upar/rng.hpp"

using namespace upar;
using namespace upar::testing;

namespace {

// Midpoint-rule empirical CDF by direct counting.
double brute_percentile(const std::vector<double>& s, double v) {
  double below = 0, ties = 0;
  for (const double x : s) {
    below += x < v;
    ties += x == v;
  }
  return (below + 0.5 * ties) / static_cast<double>(s.size());
}

const char* kSmallCsv =
    "A,B,C,D,y\n"
    "10,5,1,0,1\n"
    "20,6,2,1,0\n"
    "30,7,3,0,1\n";

}  // namespace

TEST_SUITE("data") {
  TEST_CASE("csv with three matching rows parses to three rows") {
    const auto ds = parse_csv(kSmallCsv, two_actionable_schema());
    CHECK(ds.size() == 3);
    CHECK(ds.rejected_rows == 0);
    CHECK(ds.labels == std::vector<int>{1, -1, 1});
    CHECK(ds.rows[1] == std::vector<double>{20, 6, 2, 1});
  }

  TEST_CASE("missing target column is an error naming the column") {
    const std::string text = "A,B,C,D\n1,2,3,0\n";
    CHECK_THROWS_WITH_AS(parse_csv(text, two_actionable_schema()),
                         doctest::Contains("missing column 'y'"), IoError);
  }

  TEST_CASE("categorical value outside the allowed set rejects the row") {
    const std::string text = std::string(kSmallCsv) + "40,8,4,2,1\n";
    const auto ds = parse_csv(text, two_actionable_schema());
    CHECK(ds.size() == 3);
    CHECK(ds.rejected_rows == 1);
    REQUIRE(ds.diagnostics.size() == 1);
    CHECK(ds.diagnostics[0].find("line 5") != std::string::npos);
  }

  TEST_CASE("unparseable cell rejects the row, out-of-domain value is clipped") {
    const std::string text = std::string(kSmallCsv) + "abc,8,4,1,1\n150,8,4,1,1\n";
    const auto ds = parse_csv(text, two_actionable_schema());
    CHECK(ds.size() == 4);
    CHECK(ds.rejected_rows == 1);
    CHECK(ds.rows.back()[0] == 100.0);
  }

  TEST_CASE("csv round trip is exact") {
    Rng rng(3);
    std::string text = "A,B,C,D,y\n";
    for (int i = 0; i < 50; ++i) {
      text += format_double(rng.uniform(0, 100)) + "," + format_double(rng.uniform(0, 50)) + "," +
              format_double(rng.uniform(0, 10)) + "," + (rng.bernoulli(0.5) ? "1" : "0") + "," +
              (rng.bernoulli(0.5) ? "1" : "0") + "\n";
    }
    const auto a = parse_csv(text, two_actionable_schema());
    const auto b = parse_csv(to_csv(a), two_actionable_schema());
    CHECK(a.rows == b.rows);
    CHECK(a.labels == b.labels);
  }

  TEST_CASE("schema validation") {
    CHECK_THROWS_AS(make_schema({continuous("A", 1, 1, 0.1)}), InvalidArgument);
    CHECK_THROWS_AS(make_schema({continuous("A", 0, 1, 0.1), continuous("A", 0, 1, 0.1)}),
                    InvalidArgument);
    CHECK_THROWS_AS(make_schema({categorical("K", {})}), InvalidArgument);
    CHECK_THROWS_AS(make_schema({continuous("A", 0, 1, 0.1, false)}), InvalidArgument);
    const auto s = make_schema({categorical("K", {2, 0, 1})});
    CHECK(s.feature(0).allowed_values == std::vector<double>{0, 1, 2});
  }

  TEST_CASE("schema json round trip") {
    const auto s = two_actionable_schema();
    const auto j = schema_to_json(s);
    const auto back = schema_from_json(j);
    CHECK(schema_to_json(back) == j);
    CHECK(back.actionable() == s.actionable());
  }

  TEST_CASE("percentile oracles") {
    const auto q = QuantileTable::from_samples({{1, 2, 3, 4}});
    CHECK(q.percentile(0, 2) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(q.percentile(0, 0) == 0.0);
    const auto flat = QuantileTable::from_samples({{5, 5, 5, 5}});
    CHECK(flat.percentile(0, 5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(flat.percentile(0, 4) == 0.0);
    CHECK(flat.percentile(0, 6) == 1.0);
    // Built from a dataset, a constant column is flagged by name.
    const auto s = make_schema({continuous("A", 0, 10, 1), continuous("B", 0, 10, 1)});
    const auto ds = parse_csv("A,B,y\n5,1,1\n5,2,0\n5,3,1\n", s);
    const auto built = QuantileTable::build(ds);
    REQUIRE(built.warnings().size() == 1);
    CHECK(built.warnings()[0].find("'A'") != std::string::npos);
  }

  TEST_CASE("percentile agrees with brute-force counting") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> s(30);
      for (auto& v : s) v = std::floor(rng.uniform(0, 10));  // many ties
      const auto q = QuantileTable::from_samples({s});
      for (double v = -1; v <= 11; v += 0.5) {
        CHECK(q.percentile(0, v) == doctest::Approx(brute_percentile(s, v)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("percentile from a frequency table") {
    const auto q = QuantileTable::from_frequencies({{0, 0.9}, {1, 0.1}});
    CHECK(q.percentile(0, 0) == doctest::Approx(0.45));
    CHECK(q.percentile(0, 1) == doctest::Approx(0.95));
  }

  TEST_CASE("positive-population table uses positive rows only") {
    const auto ds = parse_csv(kSmallCsv, two_actionable_schema());
    const auto q = QuantileTable::build(ds, QuantilePopulation::kPositive);
    CHECK(q.percentile(0, 10) == doctest::Approx(0.25));
    CHECK(q.percentile(0, 20) == doctest::Approx(0.5));
  }

  TEST_CASE("synthetic generator is deterministic") {
    const auto s = two_actionable_schema();
    const auto a = generate_synthetic(1, 100, s, 0.05);
    const auto b = generate_synthetic(1, 100, s, 0.05);
    CHECK(a.rows == b.rows);
    CHECK(a.labels == b.labels);
    const auto c = generate_synthetic(2, 100, s, 0.05);
    CHECK(a.rows != c.rows);
  }

  TEST_CASE("synthetic data respects the schema") {
    const auto s = two_actionable_schema();
    const auto ds = generate_synthetic(5, 200, s, 0.05);
    for (const auto& row : ds.rows) {
      for (std::size_t i = 0; i < s.dim(); ++i) {
        const auto& f = s.feature(i);
        if (f.is_continuous()) {
          CHECK(row[i] >= f.domain_min);
          CHECK(row[i] <= f.domain_max);
        } else {
          CHECK(f.value_index(row[i]).has_value());
        }
      }
    }
  }

  TEST_CASE("smallest synthetic set has both classes") {
    const auto ds = generate_synthetic(9, 10, two_actionable_schema(), 0.05);
    CHECK(std::count(ds.labels.begin(), ds.labels.end(), 1) > 0);
    CHECK(std::count(ds.labels.begin(), ds.labels.end(), -1) > 0);
    CHECK_THROWS_AS(generate_synthetic(9, 9, two_actionable_schema(), 0.05), InvalidArgument);
  }

  TEST_CASE("well separated synthetic data is fitted perfectly by logistic regression") {
    const auto ds = generate_synthetic(7, 400, two_actionable_schema(), 10.0);
    const auto m = train_logistic(ds, 0.0, 3000, 1.0, 1);
    CHECK(accuracy(m, ds) == 1.0);
  }

  TEST_CASE("min-max scaling") {
    const auto f = continuous("A", 10, 30, 1);
    CHECK(scale_value(f, 10) == 0.0);
    CHECK(scale_value(f, 30) == 1.0);
    CHECK(scale_value(f, 20) == 0.5);
    CHECK(unscale_value(f, 0.25) == 15.0);
    // A single allowed value has zero width and scales to 0.
    const auto k = categorical("K", {4});
    CHECK(scale_value(k, 4) == 0.0);
    const auto s = two_actionable_schema();
    const std::vector<double> x{25, 10, 5, 1};
    const auto back = min_max_unscale(min_max_scale(x, s), s);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == doctest::Approx(x[i]));
  }

  TEST_CASE("shortest round-trip number formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(3) == "3");
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
      const double v = rng.normal() * 1e3;
      CHECK(std::stod(format_double(v)) == v);
    }
  }
}
