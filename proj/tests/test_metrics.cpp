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
#include "upar/engine.hpp"
#include "upar/error.hpp"
#include "upar/metrics.hpp"

using namespace upar;
using namespace upar::testing;

namespace {

RecourseResult with_valid(bool v) {
  RecourseResult r;
  r.valid = v;
  return r;
}

// Plain re-derivations used as oracles below.
int label_of(const std::vector<double>& w, double b, const std::vector<double>& p) {
  double z = b;
  for (std::size_t i = 0; i < w.size(); ++i) z += w[i] * p[i];
  return 1.0 / (1.0 + std::exp(-z)) >= 0.5 ? 1 : -1;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("success rate") {
    std::vector<RecourseResult> all(4, with_valid(true));
    CHECK(success_rate(all) == 1.0);
    std::vector<RecourseResult> none(4, with_valid(false));
    CHECK(success_rate(none) == 0.0);
    std::vector<RecourseResult> credit(155, with_valid(false));
    std::fill_n(credit.begin(), 135, with_valid(true));
    CHECK(success_rate(credit) == doctest::Approx(0.871).epsilon(1e-3));
    CHECK_THROWS_AS(success_rate(std::vector<RecourseResult>{}), InvalidArgument);
  }

  TEST_CASE("constraint violations") {
    const auto s = two_actionable_schema();
    CHECK(constraint_violations(std::vector<double>{0, 0, 0, 0}, s) == 0);
    CHECK(constraint_violations(std::vector<double>{3, -1, 0, 0}, s) == 0);
    CHECK(constraint_violations(std::vector<double>{3, 0, 0.5, 1}, s) == 2);
  }

  TEST_CASE("redundancy") {
    const LinearModel m({1, 0}, -1);
    const std::vector<double> x{0, 0};
    CHECK(redundancy(m, x, std::vector<double>{2, 0}) == 0);
    CHECK(redundancy(m, x, std::vector<double>{2, 5}) == 1);
    CHECK(redundancy(m, x, std::vector<double>{0, 0}) == 0);
  }

  TEST_CASE("proximity and sparsity") {
    const auto s = two_actionable_schema();
    const std::vector<double> x{0, 0, 5, 0};
    CHECK(proximity(x, std::vector<double>{0, 0, 0, 0}, s) == 0.0);
    CHECK(proximity(x, std::vector<double>{100, 0, 0, 0}, s) == doctest::Approx(1.0));
    CHECK(proximity(x, std::vector<double>{50, 25, 0, 0}, s) == doctest::Approx(std::sqrt(0.5)));
    CHECK(sparsity(std::vector<double>{0, 0, 0, 0}) == 0);
    CHECK(sparsity(std::vector<double>{1, -2, 0, 0.5}) == 3);
  }

  TEST_CASE("prmse examples") {
    using G = std::map<std::string, double>;
    const auto exact = prmse({G{{"a", 0.3}, {"b", 0.7}}}, {G{{"a", 0.3}, {"b", 0.7}}});
    CHECK(exact.prmse == 0.0);
    const auto half = prmse({G{{"a", 1}, {"b", 0}}}, {G{{"a", 0.5}, {"b", 0.5}}});
    CHECK(half.per_feature.at("a") == doctest::Approx(0.5));
    CHECK(half.per_feature.at("b") == doctest::Approx(0.5));
    CHECK(half.prmse == doctest::Approx(0.5));
    const auto two = prmse({G{{"a", 0.6}}, G{{"a", 0.8}}}, {G{{"a", 0.5}}, G{{"a", 0.5}}});
    CHECK(two.per_feature.at("a") == doctest::Approx(std::sqrt(0.05)).epsilon(1e-12));
    CHECK(two.per_feature.at("a") == doctest::Approx(0.2236).epsilon(1e-4));
  }

  TEST_CASE("prmse exclusion and errors") {
    using G = std::map<std::string, double>;
    const auto rep = prmse({std::nullopt, G{{"a", 1}}}, {G{{"a", 0.5}}, G{{"a", 0.5}}});
    CHECK(rep.excluded == 1);
    CHECK(rep.included == 1);
    CHECK(rep.prmse == doctest::Approx(0.5));
    CHECK_THROWS_AS(prmse({std::nullopt}, {G{{"a", 1}}}), InvalidArgument);
    CHECK_THROWS_AS(prmse({G{}}, {}), InvalidArgument);
  }

  TEST_CASE("prmse is permutation invariant") {
    using G = std::map<std::string, double>;
    Rng rng(8);
    std::vector<std::optional<G>> obs;
    std::vector<G> req;
    for (int k = 0; k < 30; ++k) {
      const double a = rng.uniform();
      obs.push_back(G{{"a", a}, {"b", 1 - a}});
      const double g = rng.uniform();
      req.push_back(G{{"a", g}, {"b", 1 - g}});
    }
    const double base = prmse(obs, req).prmse;
    std::reverse(obs.begin(), obs.end());
    std::reverse(req.begin(), req.end());
    CHECK(prmse(obs, req).prmse == doctest::Approx(base).epsilon(1e-12));
  }

  TEST_CASE("brute-force agreement on random small cases") {
    Rng rng(77);
    for (int c = 0; c < 50; ++c) {
      const std::size_t d = 2 + rng.below(4);
      std::vector<FeatureSpec> fs;
      for (std::size_t i = 0; i < d; ++i) {
        const double lo = rng.uniform(-5, 0), hi = lo + rng.uniform(0.5, 10);
        fs.push_back(continuous("f" + std::to_string(i), lo, hi, 0.1));
      }
      const auto s = make_schema(fs);
      std::vector<double> w(d), x(d), r(d);
      for (auto& v : w) v = rng.uniform(-2, 2);
      const double b = rng.uniform(-1, 1);
      for (std::size_t i = 0; i < d; ++i) {
        x[i] = rng.uniform(fs[i].domain_min, fs[i].domain_max);
        r[i] = rng.bernoulli(0.6) ? rng.uniform(-1, 1) : 0.0;
      }
      const LinearModel m(w, b);

      std::size_t red = 0, sp = 0;
      double prox = 0;
      for (std::size_t i = 0; i < d; ++i) {
        if (r[i] == 0) continue;
        ++sp;
        std::vector<double> p(d);
        for (std::size_t k = 0; k < d; ++k) p[k] = k == i ? x[k] : x[k] + r[k];
        red += label_of(w, b, p) == 1;
        const double width = fs[i].domain_max - fs[i].domain_min;
        const double diff = (x[i] + r[i] - fs[i].domain_min) / width - (x[i] - fs[i].domain_min) / width;
        prox += diff * diff;
      }
      CHECK(redundancy(m, x, r) == red);
      CHECK(sparsity(r) == sp);
      CHECK(std::abs(proximity(x, r, s) - std::sqrt(prox)) <= 1e-12);
      CHECK(redundancy(m, x, r) <= sparsity(r));
      CHECK((proximity(x, r, s) == 0.0) == (sparsity(r) == 0));
    }
  }

  TEST_CASE("evaluation and grouping") {
    const auto s = make_schema({continuous("A", 0, 10, 1), continuous("B", 0, 10, 1)});
    const LinearModel m({1, 1}, -5);
    std::vector<Evaluated> items;
    for (int k = 0; k < 6; ++k) {
      Evaluated e;
      e.x = {1, 1};
      e.result.valid = k != 5;
      e.result.final_action = {3, 1};
      e.result.fractional_costs = std::map<std::string, double>{{"A", 0.75}, {"B", 0.25}};
      e.gamma = {{"A", 0.5}, {"B", 0.5}};
      e.group = k % 2 == 0 ? "even" : "odd";
      items.push_back(e);
    }
    const auto rep = evaluate(m, s, items);
    CHECK(rep.attempts == 6);
    CHECK(rep.successes == 5);
    CHECK(rep.sparsity == 2.0);
    REQUIRE(rep.prmse);
    CHECK(rep.prmse->prmse == doctest::Approx(0.25));
    REQUIRE(rep.groups.size() == 2);
    CHECK(rep.groups.at("even").attempts + rep.groups.at("odd").attempts == 6);
    CHECK(rep.groups.at("odd").successes == 2);

    for (auto& e : items) e.group = "one";
    const auto single = grouped(m, s, items);
    auto flat = report_to_json(evaluate(m, s, items));
    flat.erase("groups");
    CHECK(report_to_json(single.at("one")) == flat);
    CHECK_THROWS_AS(grouped(m, s, std::vector<Evaluated>{}), InvalidArgument);
  }

  TEST_CASE("report serialisation") {
    MetricsReport rep;
    rep.success_rate = 0.5;
    CHECK(report_csv_header() == "success_rate,prmse,avg_time_s,con_vio,redundancy,proximity,sparsity");
    CHECK(report_csv_row(rep) == "0.5,nan,0,0,0,0,0");
    CHECK(report_to_json(rep)["prmse"].is_null());
  }

  TEST_CASE("cost bound on a one-feature walk") {
    const auto s = make_schema({continuous("X", -1, 1, 0.1)});
    const LinearModel m({1}, 0);
    std::vector<double> col;
    for (int k = 0; k <= 40; ++k) col.push_back(-1 + 0.05 * k);
    const auto q = QuantileTable::from_samples({col});
    const auto p = default_profile(s);
    const std::vector<double> x{-0.5};
    std::vector<Trajectory> runs;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      runs.push_back(run_stage1(m, s, x, p, q, EngineConfig{}, rng));
    }
    const auto chk = lemma_bound_check(runs, x, p, s, q, CostConfig{});
    REQUIRE(chk.features.size() == 1);
    const auto& f = chk.features[0];
    CHECK(chk.t_star == 5);
    CHECK(f.sigma == 1.0);
    CHECK(f.satisfied);
    // The walk telescopes, so the cost sits between T* C_min and T* C_max.
    CHECK(f.mean_cost >= chk.t_star * f.c_min - 1e-12);
    CHECK(f.mean_cost <= chk.t_star * f.c_max + 1e-12);

    // Runs that never moved cost nothing.
    const std::vector<Trajectory> idle(3);
    const auto zero = lemma_bound_check(idle, x, p, s, q, CostConfig{});
    CHECK(zero.features[0].mean_cost == 0.0);
    CHECK(zero.features[0].satisfied);
  }
}
