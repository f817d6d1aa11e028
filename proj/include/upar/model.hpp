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

#ifndef UPAR_MODEL_HPP
#define UPAR_MODEL_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "upar/data.hpp"

namespace upar {

// Binary classifier returning P(y = +1 | x), with its input gradient.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual std::size_t dim() const = 0;
  virtual double predict_proba(std::span<const double> x) const = 0;
  // d P(y = +1) / d x_i, the +1 row of the Jacobian.
  virtual std::vector<double> sensitivity(std::span<const double> x) const = 0;
  virtual nlohmann::json to_json() const = 0;

  int predict_label(std::span<const double> x) const {
    return predict_proba(x) >= 0.5 ? 1 : -1;
  }

 protected:
  void check_dim(std::span<const double> x) const;
};

// Logistic regression on raw feature values.
class LinearModel final : public Predictor {
 public:
  LinearModel(std::vector<double> weights, double bias);

  std::size_t dim() const override { return weights_.size(); }
  double predict_proba(std::span<const double> x) const override;
  std::vector<double> sensitivity(std::span<const double> x) const override;
  nlohmann::json to_json() const override;

  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  std::vector<double> weights_;
  double bias_;
};

enum class Activation { kRelu, kTanh };

// Fully connected network with a single logistic output unit. Inputs are
// affinely normalised, z = (x - input_offset) * input_scale, before the first
// layer.
class MlpModel final : public Predictor {
 public:
  struct Layer {
    std::vector<double> weights;  // out x in, row-major
    std::vector<double> bias;     // out
    std::size_t in = 0;
    std::size_t out = 0;
  };

  MlpModel(std::vector<Layer> layers, Activation activation, std::vector<double> input_offset,
           std::vector<double> input_scale);

  // Random init (scaled uniform) for the given layer sizes; the last entry of
  // `dims` must be 1.
  static MlpModel random(const std::vector<std::size_t>& dims, Activation activation,
                         std::uint64_t seed, std::vector<double> input_offset = {},
                         std::vector<double> input_scale = {});

  std::size_t dim() const override { return layers_.front().in; }
  double predict_proba(std::span<const double> x) const override;
  std::vector<double> sensitivity(std::span<const double> x) const override;
  nlohmann::json to_json() const override;

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  Activation activation() const { return activation_; }
  const std::vector<double>& input_offset() const { return input_offset_; }
  const std::vector<double>& input_scale() const { return input_scale_; }

  struct Forward {
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<std::vector<double>> post;  // post[0] is the normalised input
    double proba = 0.0;
  };
  Forward forward(std::span<const double> x) const;
  // Gradient of P(y=+1) with respect to the normalised input.
  std::vector<double> backward_input(const Forward& fw) const;

 private:
  std::vector<Layer> layers_;
  Activation activation_;
  std::vector<double> input_offset_;
  std::vector<double> input_scale_;
};

struct TrainReport {
  std::vector<double> loss_history;
  double train_accuracy = 0.0;
};

// Full-batch gradient descent on mean logistic loss + l2/2 |w|^2, fitted in
// min-max-scaled space and converted back to raw-feature weights. The step is
// halved whenever the objective would increase, so the recorded loss is
// non-increasing.
LinearModel train_logistic(const Dataset& dataset, double l2, std::size_t epochs, double lr,
                           std::uint64_t seed, TrainReport* report = nullptr);

// Full-batch Adam on mean logistic loss for an MLP with the given hidden
// sizes.
MlpModel train_mlp(const Dataset& dataset, const std::vector<std::size_t>& hidden,
                   Activation activation, std::size_t epochs, double lr, double l2,
                   std::uint64_t seed, TrainReport* report = nullptr);

double accuracy(const Predictor& model, const Dataset& dataset);

// Model file: {"type", "dims", "activation", "weights", "bias",
// "input_offset", "input_scale"}; see docs/formats.md.
std::unique_ptr<Predictor> model_from_json(const nlohmann::json& j);
std::unique_ptr<Predictor> load_model(const std::string& path);
void save_model(const Predictor& model, const std::string& path);
// Throws InvalidArgument if the model input width differs from the schema.
void check_model_schema(const Predictor& model, const DatasetSchema& schema);

}  // namespace upar

#endif  // UPAR_MODEL_HPP
