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

#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"
#include "upar/error.hpp"
#include "upar/model.hpp"
#include "upar/rng.hpp"

using namespace upar;
using namespace upar::testing;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Central finite difference of P(+1) along coordinate i.
double fd(const Predictor& m, std::vector<double> x, std::size_t i, double h = 1e-5) {
  x[i] += h;
  const double up = m.predict_proba(x);
  x[i] -= 2 * h;
  return (up - m.predict_proba(x)) / (2 * h);
}

MlpModel two_two_one(Activation act) {
  MlpModel::Layer h{{0.5, -1.0, 2.0, 0.25}, {0.1, -0.2}, 2, 2};
  MlpModel::Layer o{{1.5, -0.75}, {0.3}, 2, 1};
  return MlpModel({h, o}, act, {0.0, 0.0}, {1.0, 1.0});
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("logistic of zero is one half") {
    const LinearModel m({1, -1}, 0);
    CHECK(m.predict_proba(std::vector<double>{0, 0}) == 0.5);
    CHECK(m.predict_label(std::vector<double>{0, 0}) == 1);
  }

  TEST_CASE("linear output saturates") {
    const LinearModel m({1}, 0);
    CHECK(m.predict_proba(std::vector<double>{50}) == doctest::Approx(1.0));
    CHECK(m.predict_proba(std::vector<double>{-50}) == doctest::Approx(0.0));
  }

  TEST_CASE("linear sensitivity is p(1-p)w and keeps the sign of w") {
    const LinearModel m({2, -3}, 0.5);
    Rng rng(4);
    for (int k = 0; k < 50; ++k) {
      const std::vector<double> x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
      const double p = m.predict_proba(x);
      const auto s = m.sensitivity(x);
      CHECK(s[0] > 0);
      CHECK(s[1] < 0);
      CHECK(s[0] == doctest::Approx(p * (1 - p) * 2));
      CHECK(s[1] == doctest::Approx(p * (1 - p) * -3));
    }
  }

  TEST_CASE("dimension mismatch throws") {
    const LinearModel m({1, 2}, 0);
    CHECK_THROWS_AS(m.predict_proba(std::vector<double>{1}), InvalidArgument);
    CHECK_THROWS_AS(m.sensitivity(std::vector<double>{1, 2, 3}), InvalidArgument);
  }

  TEST_CASE("2-2-1 network matches a hand-computed forward pass") {
    const std::vector<double> x{0.8, -0.4};
    // relu: h1 = max(0, 0.5*0.8 - 1*(-0.4) + 0.1) = 0.9
    //       h2 = max(0, 2*0.8 + 0.25*(-0.4) - 0.2) = 1.3
    //       out = sigmoid(1.5*0.9 - 0.75*1.3 + 0.3)
    const double relu_expected = sigmoid(1.5 * 0.9 - 0.75 * 1.3 + 0.3);
    CHECK(std::abs(two_two_one(Activation::kRelu).predict_proba(x) - relu_expected) < 1e-9);
    const double tanh_expected = sigmoid(1.5 * std::tanh(0.9) - 0.75 * std::tanh(1.3) + 0.3);
    CHECK(std::abs(two_two_one(Activation::kTanh).predict_proba(x) - tanh_expected) < 1e-9);
  }

  TEST_CASE("input normalisation is applied before the first layer") {
    MlpModel::Layer o{{2.0}, {0.0}, 1, 1};
    const MlpModel m({o}, Activation::kRelu, {10.0}, {0.5});
    CHECK(m.predict_proba(std::vector<double>{12}) == doctest::Approx(sigmoid(2.0)));
    CHECK(m.sensitivity(std::vector<double>{12})[0] ==
          doctest::Approx(sigmoid(2.0) * (1 - sigmoid(2.0)) * 2.0 * 0.5));
  }

  TEST_CASE("network sensitivity agrees with central differences") {
    for (const auto act : {Activation::kRelu, Activation::kTanh}) {
      const auto m = MlpModel::random({4, 18, 9, 3, 1}, act, 21);
      Rng rng(8);
      for (int k = 0; k < 50; ++k) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform(-1, 1);
        const auto s = m.sensitivity(x);
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double num = fd(m, x, i);
          CHECK(std::abs(s[i] - num) <= 1e-4 * std::max(std::abs(num), 1e-6) + 1e-9);
        }
      }
    }
  }

  TEST_CASE("dead relu network has zero sensitivity") {
    MlpModel::Layer h{{1.0, 1.0}, {-100.0}, 2, 1};
    MlpModel::Layer o{{3.0}, {0.2}, 1, 1};
    const MlpModel m({h, o}, Activation::kRelu, {0, 0}, {1, 1});
    const auto s = m.sensitivity(std::vector<double>{0.5, 0.5});
    CHECK(s == std::vector<double>{0.0, 0.0});
    CHECK(m.predict_proba(std::vector<double>{0.5, 0.5}) == doctest::Approx(sigmoid(0.2)));
  }

  TEST_CASE("logistic training fits separable data and is deterministic") {
    const auto s = two_actionable_schema();
    const auto ds = generate_synthetic(3, 300, s, 0.1);
    TrainReport rep;
    const auto a = train_logistic(ds, 1e-4, 1500, 1.0, 5, &rep);
    CHECK(accuracy(a, ds) >= 0.95);
    for (std::size_t k = 1; k < rep.loss_history.size(); ++k) {
      CHECK(rep.loss_history[k] <= rep.loss_history[k - 1]);
    }
    const auto b = train_logistic(ds, 1e-4, 1500, 1.0, 5);
    CHECK(a.weights() == b.weights());
    CHECK(a.bias() == b.bias());
  }

  TEST_CASE("strong l2 drives weights to zero and predictions to the base rate") {
    const auto ds = generate_synthetic(3, 300, two_actionable_schema(), 0.1);
    const auto m = train_logistic(ds, 1e6, 2000, 1.0, 0);
    double pos = 0;
    for (const int y : ds.labels) pos += y == 1;
    const double base = pos / static_cast<double>(ds.size());
    for (const double w : m.weights()) CHECK(std::abs(w) < 1e-4);
    CHECK(m.predict_proba(ds.rows[0]) == doctest::Approx(base).epsilon(1e-3));
  }

  TEST_CASE("network training fits separable data and is deterministic") {
    const auto ds = generate_synthetic(4, 300, two_actionable_schema(), 0.1);
    const auto a = train_mlp(ds, {18, 9, 3}, Activation::kRelu, 300, 0.01, 0.0, 2);
    CHECK(accuracy(a, ds) >= 0.95);
    const auto b = train_mlp(ds, {18, 9, 3}, Activation::kRelu, 300, 0.01, 0.0, 2);
    CHECK(a.to_json() == b.to_json());
  }

  TEST_CASE("save then load gives identical predictions") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto mlp = MlpModel::random({3, 5, 1}, Activation::kTanh, 9, {1, 2, 3}, {0.5, 0.25, 2});
    const LinearModel lin({0.1, -0.2, 0.3}, 0.05);
    Rng rng(2);
    for (const Predictor* m : {static_cast<const Predictor*>(&mlp),
                               static_cast<const Predictor*>(&lin)}) {
      const auto path = (dir / "upar_model_roundtrip.json").string();
      save_model(*m, path);
      const auto back = load_model(path);
      for (int k = 0; k < 100; ++k) {
        const std::vector<double> x{rng.normal(), rng.normal(), rng.normal()};
        CHECK(back->predict_proba(x) == m->predict_proba(x));
      }
      std::filesystem::remove(path);
    }
  }

  TEST_CASE("model file with a wrong layer shape is rejected") {
    auto j = MlpModel::random({3, 4, 1}, Activation::kRelu, 1).to_json();
    j["weights"][0].erase(0);
    CHECK_THROWS_AS(model_from_json(j), InvalidArgument);
    nlohmann::json lin{{"type", "linear"}, {"dims", {2, 1}}, {"weights", {{1.0}}}, {"bias", {0.0}}};
    CHECK_THROWS_AS(model_from_json(lin), InvalidArgument);
  }

  TEST_CASE("linear model json exposes a plain weight row") {
    const LinearModel m({0.5, -1.5}, 2.0);
    const auto j = m.to_json();
    CHECK(j["type"] == "linear");
    CHECK(j["weights"][0] == nlohmann::json({0.5, -1.5}));
    CHECK(j["bias"][0] == 2.0);
  }
}
