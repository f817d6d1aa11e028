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

#include "upar/model.hpp"

#include <cmath>
#include <fstream>

#include "upar/error.hpp"
#include "upar/rng.hpp"

namespace upar {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(-m)), stable for large |m|.
double logistic_loss(double margin) {
  if (margin > 0.0) return std::log1p(std::exp(-margin));
  return -margin + std::log1p(std::exp(margin));
}

double activate(Activation a, double v) {
  return a == Activation::kRelu ? (v > 0.0 ? v : 0.0) : std::tanh(v);
}

// Derivative in terms of the pre-activation; ReLU'(0) = 0.
double activate_grad(Activation a, double pre, double post) {
  if (a == Activation::kRelu) return pre > 0.0 ? 1.0 : 0.0;
  return 1.0 - post * post;
}

const char* to_string(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  throw InvalidArgument("unknown activation '" + s + "'");
}

// Linear [0, 1] rescaling used as a training preconditioner.
struct Rescale {
  std::vector<double> lower;
  std::vector<double> inv_width;

  explicit Rescale(const DatasetSchema& schema) {
    for (const auto& f : schema.features()) {
      lower.push_back(f.lower());
      const double w = f.upper() - f.lower();
      inv_width.push_back(w > 0.0 ? 1.0 / w : 1.0);
    }
  }
  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = (x[i] - lower[i]) * inv_width[i];
    return u;
  }
};

}  // namespace

void Predictor::check_dim(std::span<const double> x) const {
  if (x.size() != dim()) {
    throw InvalidArgument("dimension mismatch: model expects " + std::to_string(dim()) +
                          " features, got " + std::to_string(x.size()));
  }
}

LinearModel::LinearModel(std::vector<double> weights, double bias)
    : weights_(std::move(weights)), bias_(bias) {
  if (weights_.empty()) throw InvalidArgument("linear model with no weights");
}

double LinearModel::predict_proba(std::span<const double> x) const {
  check_dim(x);
  double z = bias_;
  for (std::size_t i = 0; i < x.size(); ++i) z += weights_[i] * x[i];
  return sigmoid(z);
}

std::vector<double> LinearModel::sensitivity(std::span<const double> x) const {
  const double p = predict_proba(x);
  std::vector<double> g(weights_.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = p * (1.0 - p) * weights_[i];
  return g;
}

nlohmann::json LinearModel::to_json() const {
  return {{"type", "linear"},
          {"dims", {weights_.size(), 1}},
          {"weights", nlohmann::json::array({weights_})},
          {"bias", {bias_}}};
}

MlpModel::MlpModel(std::vector<Layer> layers, Activation activation,
                   std::vector<double> input_offset, std::vector<double> input_scale)
    : layers_(std::move(layers)),
      activation_(activation),
      input_offset_(std::move(input_offset)),
      input_scale_(std::move(input_scale)) {
  if (layers_.empty()) throw InvalidArgument("mlp with no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weights.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
      throw InvalidArgument("mlp layer " + std::to_string(l) + ": parameter shape mismatch");
    }
    if (l > 0 && layers_[l - 1].out != layer.in) {
      throw InvalidArgument("mlp layer " + std::to_string(l) + ": incompatible dimensions");
    }
  }
  if (layers_.back().out != 1) throw InvalidArgument("mlp output layer must have width 1");
  const std::size_t d = layers_.front().in;
  if (input_offset_.empty()) input_offset_.assign(d, 0.0);
  if (input_scale_.empty()) input_scale_.assign(d, 1.0);
  if (input_offset_.size() != d || input_scale_.size() != d) {
    throw InvalidArgument("mlp input normalisation width mismatch");
  }
}

MlpModel MlpModel::random(const std::vector<std::size_t>& dims, Activation activation,
                          std::uint64_t seed, std::vector<double> input_offset,
                          std::vector<double> input_scale) {
  if (dims.size() < 2) throw InvalidArgument("mlp dims need at least input and output");
  Rng rng(seed);
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer;
    layer.in = dims[l];
    layer.out = dims[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    layer.weights.resize(layer.in * layer.out);
    for (auto& w : layer.weights) w = rng.uniform(-limit, limit);
    layer.bias.resize(layer.out);
    for (auto& b : layer.bias) b = rng.uniform(-0.1, 0.1);
    layers.push_back(std::move(layer));
  }
  return MlpModel(std::move(layers), activation, std::move(input_offset),
                  std::move(input_scale));
}

MlpModel::Forward MlpModel::forward(std::span<const double> x) const {
  check_dim(x);
  Forward fw;
  std::vector<double> h(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) h[i] = (x[i] - input_offset_[i]) * input_scale_[i];
  fw.post.push_back(h);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    std::vector<double> pre(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      double acc = layer.bias[o];
      const double* row = &layer.weights[o * layer.in];
      for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * fw.post.back()[i];
      pre[o] = acc;
    }
    const bool output = l + 1 == layers_.size();
    std::vector<double> post(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      post[o] = output ? sigmoid(pre[o]) : activate(activation_, pre[o]);
    }
    fw.pre.push_back(std::move(pre));
    fw.post.push_back(std::move(post));
  }
  fw.proba = fw.post.back()[0];
  return fw;
}

std::vector<double> MlpModel::backward_input(const Forward& fw) const {
  // Gradient with respect to the output-layer pre-activation.
  std::vector<double> grad{fw.proba * (1.0 - fw.proba)};
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    std::vector<double> prev(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* row = &layer.weights[o * layer.in];
      for (std::size_t i = 0; i < layer.in; ++i) prev[i] += row[i] * grad[o];
    }
    if (l > 0) {
      for (std::size_t i = 0; i < layer.in; ++i) {
        prev[i] *= activate_grad(activation_, fw.pre[l - 1][i], fw.post[l][i]);
      }
    }
    grad = std::move(prev);
  }
  return grad;
}

double MlpModel::predict_proba(std::span<const double> x) const { return forward(x).proba; }

std::vector<double> MlpModel::sensitivity(std::span<const double> x) const {
  auto g = backward_input(forward(x));
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= input_scale_[i];
  return g;
}

nlohmann::json MlpModel::to_json() const {
  nlohmann::json dims = nlohmann::json::array({layers_.front().in});
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (const auto& layer : layers_) {
    dims.push_back(layer.out);
    nlohmann::json mat = nlohmann::json::array();
    for (std::size_t o = 0; o < layer.out; ++o) {
      mat.push_back(std::vector<double>(layer.weights.begin() + o * layer.in,
                                        layer.weights.begin() + (o + 1) * layer.in));
    }
    weights.push_back(std::move(mat));
    biases.push_back(layer.bias);
  }
  return {{"type", "mlp"},
          {"dims", std::move(dims)},
          {"activation", to_string(activation_)},
          {"weights", std::move(weights)},
          {"bias", std::move(biases)},
          {"input_offset", input_offset_},
          {"input_scale", input_scale_}};
}

double accuracy(const Predictor& model, const Dataset& dataset) {
  if (dataset.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    if (model.predict_label(dataset.rows[r]) == dataset.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

LinearModel train_logistic(const Dataset& dataset, double l2, std::size_t epochs, double lr,
                           std::uint64_t seed, TrainReport* report) {
  if (dataset.size() < 2) throw InvalidArgument("train_logistic: need at least 2 rows");
  bool has_pos = false, has_neg = false;
  for (const int y : dataset.labels) (y > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw InvalidArgument("train_logistic: need both classes");
  if (!(lr > 0.0) || l2 < 0.0) throw InvalidArgument("train_logistic: bad lr or l2");

  const Rescale rescale(dataset.schema);
  std::vector<std::vector<double>> u;
  u.reserve(dataset.size());
  for (const auto& row : dataset.rows) u.push_back(rescale.apply(row));
  const std::size_t d = dataset.schema.dim();
  const double n = static_cast<double>(dataset.size());

  Rng rng(seed);
  std::vector<double> w(d);
  for (auto& wi : w) wi = rng.uniform(-0.01, 0.01);
  double b = 0.0;

  auto objective = [&](const std::vector<double>& wv, double bv) {
    double loss = 0.0;
    for (std::size_t r = 0; r < u.size(); ++r) {
      double z = bv;
      for (std::size_t i = 0; i < d; ++i) z += wv[i] * u[r][i];
      loss += logistic_loss(dataset.labels[r] * z);
    }
    double reg = 0.0;
    for (const double wi : wv) reg += wi * wi;
    return loss / n + 0.5 * l2 * reg;
  };

  TrainReport local;
  double loss = objective(w, b);
  local.loss_history.push_back(loss);
  double step = lr;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::vector<double> gw(d, 0.0);
    double gb = 0.0;
    for (std::size_t r = 0; r < u.size(); ++r) {
      double z = b;
      for (std::size_t i = 0; i < d; ++i) z += w[i] * u[r][i];
      const double y = dataset.labels[r];
      // d/dz log(1 + exp(-y z)) = -y * sigmoid(-y z)
      const double coef = -y * sigmoid(-y * z) / n;
      for (std::size_t i = 0; i < d; ++i) gw[i] += coef * u[r][i];
      gb += coef;
    }
    for (std::size_t i = 0; i < d; ++i) gw[i] += l2 * w[i];

    std::vector<double> w_new(d);
    double b_new = b;
    double loss_new = loss;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      for (std::size_t i = 0; i < d; ++i) w_new[i] = w[i] - step * gw[i];
      b_new = b - step * gb;
      loss_new = objective(w_new, b_new);
      if (!std::isfinite(loss_new)) {
        throw NumericError("train_logistic: non-finite loss at epoch " +
                           std::to_string(epoch));
      }
      if (loss_new <= loss) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // converged to machine precision
    w = std::move(w_new);
    b = b_new;
    loss = loss_new;
    local.loss_history.push_back(loss);
    step = std::min(lr, step * 1.5);
  }

  // Undo the rescaling: w_s . (x - lower) * inv_width + b.
  std::vector<double> raw(d);
  double raw_bias = b;
  for (std::size_t i = 0; i < d; ++i) {
    raw[i] = w[i] * rescale.inv_width[i];
    raw_bias -= raw[i] * rescale.lower[i];
  }
  LinearModel model(std::move(raw), raw_bias);
  local.train_accuracy = accuracy(model, dataset);
  if (report) *report = std::move(local);
  return model;
}

MlpModel train_mlp(const Dataset& dataset, const std::vector<std::size_t>& hidden,
                   Activation activation, std::size_t epochs, double lr, double l2,
                   std::uint64_t seed, TrainReport* report) {
  if (dataset.size() < 2) throw InvalidArgument("train_mlp: need at least 2 rows");
  const Rescale rescale(dataset.schema);
  std::vector<std::size_t> dims{dataset.schema.dim()};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  MlpModel model = MlpModel::random(dims, activation, seed, rescale.lower, rescale.inv_width);
  auto& layers = model.mutable_layers();

  // Adam state, one moment pair per parameter tensor.
  std::vector<std::vector<double>> mw, vw, mb, vb;
  for (const auto& layer : layers) {
    mw.emplace_back(layer.weights.size(), 0.0);
    vw.emplace_back(layer.weights.size(), 0.0);
    mb.emplace_back(layer.bias.size(), 0.0);
    vb.emplace_back(layer.bias.size(), 0.0);
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const double n = static_cast<double>(dataset.size());
  TrainReport local;

  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    std::vector<std::vector<double>> gw, gb;
    for (const auto& layer : layers) {
      gw.emplace_back(layer.weights.size(), 0.0);
      gb.emplace_back(layer.bias.size(), 0.0);
    }
    double loss = 0.0;
    for (std::size_t r = 0; r < dataset.size(); ++r) {
      const auto fw = model.forward(dataset.rows[r]);
      const double y01 = dataset.labels[r] > 0 ? 1.0 : 0.0;
      const double p = std::clamp(fw.proba, 1e-15, 1.0 - 1e-15);
      loss -= y01 * std::log(p) + (1.0 - y01) * std::log(1.0 - p);
      // Cross-entropy gradient at the output logit.
      std::vector<double> grad{(fw.proba - y01) / n};
      for (std::size_t l = layers.size(); l-- > 0;) {
        const auto& layer = layers[l];
        const auto& input = fw.post[l];
        std::vector<double> prev(layer.in, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
          gb[l][o] += grad[o];
          for (std::size_t i = 0; i < layer.in; ++i) {
            gw[l][o * layer.in + i] += grad[o] * input[i];
            prev[i] += layer.weights[o * layer.in + i] * grad[o];
          }
        }
        if (l > 0) {
          for (std::size_t i = 0; i < layer.in; ++i) {
            prev[i] *= activate_grad(activation, fw.pre[l - 1][i], fw.post[l][i]);
          }
        }
        grad = std::move(prev);
      }
    }
    loss /= n;
    if (!std::isfinite(loss)) {
      throw NumericError("train_mlp: non-finite loss at epoch " + std::to_string(epoch));
    }
    local.loss_history.push_back(loss);
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(epoch));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(epoch));
    auto adam = [&](std::vector<double>& param, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v, double decay) {
      for (std::size_t k = 0; k < param.size(); ++k) {
        const double gk = g[k] + decay * param[k];
        m[k] = beta1 * m[k] + (1.0 - beta1) * gk;
        v[k] = beta2 * v[k] + (1.0 - beta2) * gk * gk;
        param[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
      }
    };
    for (std::size_t l = 0; l < layers.size(); ++l) {
      adam(layers[l].weights, gw[l], mw[l], vw[l], l2);
      adam(layers[l].bias, gb[l], mb[l], vb[l], 0.0);
    }
  }
  local.train_accuracy = accuracy(model, dataset);
  if (report) *report = std::move(local);
  return model;
}

std::unique_ptr<Predictor> model_from_json(const nlohmann::json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    if (dims.size() < 2 || dims.back() != 1) {
      throw InvalidArgument("model: dims must end with output width 1");
    }
    if (type == "linear") {
      const auto w = j.at("weights").get<std::vector<std::vector<double>>>();
      const auto b = j.at("bias").get<std::vector<double>>();
      if (dims.size() != 2 || w.size() != 1 || w[0].size() != dims[0] || b.size() != 1) {
        throw InvalidArgument("model: linear weight shape does not match dims");
      }
      return std::make_unique<LinearModel>(w[0], b[0]);
    }
    if (type == "mlp") {
      const auto w = j.at("weights").get<std::vector<std::vector<std::vector<double>>>>();
      const auto b = j.at("bias").get<std::vector<std::vector<double>>>();
      if (w.size() + 1 != dims.size() || b.size() + 1 != dims.size()) {
        throw InvalidArgument("model: layer count does not match dims");
      }
      std::vector<MlpModel::Layer> layers;
      for (std::size_t l = 0; l < w.size(); ++l) {
        MlpModel::Layer layer;
        layer.in = dims[l];
        layer.out = dims[l + 1];
        if (w[l].size() != layer.out || b[l].size() != layer.out) {
          throw InvalidArgument("model: layer " + std::to_string(l) + " has wrong shape");
        }
        for (const auto& row : w[l]) {
          if (row.size() != layer.in) {
            throw InvalidArgument("model: layer " + std::to_string(l) + " has wrong shape");
          }
          layer.weights.insert(layer.weights.end(), row.begin(), row.end());
        }
        layer.bias = b[l];
        layers.push_back(std::move(layer));
      }
      return std::make_unique<MlpModel>(
          std::move(layers), parse_activation(j.value("activation", std::string("relu"))),
          j.value("input_offset", std::vector<double>{}),
          j.value("input_scale", std::vector<double>{}));
    }
    throw InvalidArgument("model: unknown type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("model: ") + e.what());
  }
}

std::unique_ptr<Predictor> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("model file '" + path + "': " + e.what());
  }
  return model_from_json(j);
}

void save_model(const Predictor& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file '" + path + "'");
  out << model.to_json().dump(2) << "\n";
}

void check_model_schema(const Predictor& model, const DatasetSchema& schema) {
  if (model.dim() != schema.dim()) {
    throw InvalidArgument("model expects " + std::to_string(model.dim()) +
                          " features but schema has " + std::to_string(schema.dim()));
  }
}

}  // namespace upar
