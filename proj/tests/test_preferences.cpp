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

#include "doctest.h"
#include "helpers.hpp"
#include "upar/error.hpp"
#include "upar/preferences.hpp"
#include "upar/rng.hpp"

using namespace upar;
using namespace upar::testing;

namespace {

bool has_violation(const std::vector<Violation>& v, const std::string& field,
                   const std::string& text) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) {
    return x.field == field && x.message.find(text) != std::string::npos;
  });
}

DatasetSchema mixed_schema() {
  return make_schema({continuous("Duration", 4, 72, 1), continuous("Amount", 250, 18424, 100),
                      categorical("Critical", {0, 1}), categorical("Guarantor", {0, 1}),
                      categorical("Coapplicant", {0, 1}), continuous("Age", 19, 75, 1, false)});
}

}  // namespace

TEST_SUITE("preferences") {
  TEST_CASE("defaults are uniform over continuous actionables") {
    const auto p = default_profile(two_actionable_schema());
    CHECK(p.gamma.size() == 2);
    CHECK(p.gamma.at("A") == 0.5);
    CHECK(p.gamma.at("B") == 0.5);
    CHECK(p.tau == 0.25);
    CHECK(validate(p, two_actionable_schema()).empty());
  }

  TEST_CASE("no actionable features means no default profile") {
    // A schema without actionable features cannot be constructed either.
    CHECK_THROWS_AS(make_schema({continuous("A", 0, 1, 0.1, false)}), InvalidArgument);
  }

  TEST_CASE("default ranking follows schema order") {
    const auto s = make_schema({categorical("P", {0, 1}), continuous("X", 0, 1, 0.1, false),
                                categorical("Q", {0, 1, 2}), categorical("R", {0, 1})});
    const auto p = default_profile(s);
    CHECK(p.ranking.at("P") == 1);
    CHECK(p.ranking.at("Q") == 2);
    CHECK(p.ranking.at("R") == 3);
    CHECK(p.gamma.empty());
    CHECK(validate(p, s).empty());
  }

  TEST_CASE("gamma 0.8 / 0.2 is accepted") {
    auto p = default_profile(mixed_schema());
    p.gamma = {{"Duration", 0.8}, {"Amount", 0.2}};
    CHECK(validate(p, mixed_schema()).empty());
  }

  TEST_CASE("gamma not summing to one is reported") {
    auto p = default_profile(mixed_schema());
    p.gamma = {{"Duration", 0.8}, {"Amount", 0.3}};
    CHECK(has_violation(validate(p, mixed_schema()), "gamma", "gamma sum != 1"));
  }

  TEST_CASE("duplicate ranks are reported") {
    auto p = default_profile(mixed_schema());
    p.ranking = {{"Critical", 1}, {"Guarantor", 1}};
    CHECK(has_violation(validate(p, mixed_schema()), "ranking", "ranking not injective"));
  }

  TEST_CASE("field-level violations") {
    const auto s = mixed_schema();
    auto p = default_profile(s);
    p.gamma["Age"] = 0.1;
    p.bounds["Duration"] = {50, 10};
    p.bounds["Amount"] = {20000, 30000};
    p.steps["Duration"] = -1;
    p.steps["Critical"] = 1;
    p.values["Guarantor"] = {0, 2};
    p.values["Coapplicant"] = {1, 1};
    p.ranking["Nope"] = 4;
    p.ranking["Critical"] = 0;
    p.tau = 0;
    p.max_steps = -1;
    const auto v = validate(p, s);
    CHECK(has_violation(v, "gamma", "non-actionable"));
    CHECK(has_violation(v, "bounds", "lower bound exceeds"));
    CHECK(has_violation(v, "bounds", "do not intersect"));
    CHECK(has_violation(v, "steps", "must be positive"));
    CHECK(has_violation(v, "steps", "categorical"));
    CHECK(has_violation(v, "values", "not allowed"));
    CHECK(has_violation(v, "values", "duplicate"));
    CHECK(has_violation(v, "ranking", "unknown feature"));
    CHECK(has_violation(v, "ranking", "positive integer"));
    CHECK(has_violation(v, "tau", "> 0"));
    CHECK(has_violation(v, "max_steps", ">= 0"));
  }

  TEST_CASE("renormalisation") {
    const auto a = renormalize_gamma(std::map<std::string, double>{{"a", 4}, {"b", 1}});
    CHECK(a.at("a") == doctest::Approx(0.8));
    CHECK(a.at("b") == doctest::Approx(0.2));
    CHECK(renormalize_gamma(std::vector<double>{1, 0, 1}) == std::vector<double>{0.5, 0, 0.5});
    CHECK_THROWS_AS(renormalize_gamma(std::vector<double>{0, 0}), InvalidArgument);
    CHECK_THROWS_AS(renormalize_gamma(std::vector<double>{1, -1}), InvalidArgument);
  }

  TEST_CASE("renormalisation sums to one and keeps ratios") {
    Rng rng(12);
    for (int k = 0; k < 200; ++k) {
      std::vector<double> s(1 + rng.below(6));
      for (auto& v : s) v = rng.uniform(0.01, 10);
      const auto g = renormalize_gamma(s);
      double sum = 0;
      for (const double v : g) sum += v;
      CHECK(std::abs(sum - 1) <= 1e-12);
      for (std::size_t i = 1; i < s.size(); ++i) {
        CHECK(g[i] / g[0] == doctest::Approx(s[i] / s[0]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("resolution onto schema indices") {
    const auto s = mixed_schema();
    auto p = default_profile(s);
    p.gamma = {{"Duration", 0.8}, {"Amount", 0.2}};
    p.bounds["Duration"] = {0, 30};
    p.steps["Amount"] = 50;
    p.ranking = {{"Critical", 3}, {"Guarantor", 1}, {"Coapplicant", 2}};
    const auto r = resolve(p, s);
    CHECK(r.gamma[0] == 0.8);
    CHECK(r.lower[0] == 4);  // intersected with the domain
    CHECK(r.upper[0] == 30);
    CHECK(r.step[1] == 50);
    CHECK(r.rank_sequence == std::vector<std::size_t>{3, 4, 2});
    p.rank_order = RankOrder::kDescending;
    CHECK(resolve(p, s).rank_sequence == std::vector<std::size_t>{2, 4, 3});
  }

  TEST_CASE("profile json round trip") {
    const auto s = mixed_schema();
    auto p = default_profile(s);
    p.gamma = {{"Duration", 0.8}, {"Amount", 0.2}};
    p.bounds["Amount"] = {500, 5000};
    p.values["Guarantor"] = {0, 1};
    p.tau = 0.125;
    p.rank_order = RankOrder::kDescending;
    const auto j = profile_to_json(p);
    const auto back = profile_from_json(j, s);
    CHECK(profile_to_json(back) == j);
  }

  TEST_CASE("profile json errors are argument errors") {
    const auto s = mixed_schema();
    CHECK_THROWS_AS(profile_from_json(nlohmann::json::array(), s), InvalidArgument);
    CHECK_THROWS_AS(profile_from_json({{"bounds", {{"Duration", {1, 2, 3}}}}}, s),
                    InvalidArgument);
    CHECK_THROWS_AS(profile_from_json({{"tau", "hot"}}, s), InvalidArgument);
    CHECK_THROWS_AS(profile_from_json({{"rank_order", "sideways"}}, s), InvalidArgument);
  }
}
