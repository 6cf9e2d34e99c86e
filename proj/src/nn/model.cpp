// Copyright 2026 The pcgkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pcgkit/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pcg::nn {

namespace {

constexpr std::pair<LayerKind, std::string_view> kLayerNames[] = {
    {LayerKind::Conv1D, "Conv1D"},   {LayerKind::MaxPool1D, "MaxPool1D"},
    {LayerKind::BatchNorm1D, "BatchNorm1D"}, {LayerKind::Dense, "Dense"},
    {LayerKind::ReLU, "ReLU"},       {LayerKind::Tanh, "Tanh"},
    {LayerKind::Softmax, "Softmax"}, {LayerKind::Dropout, "Dropout"},
    {LayerKind::Flatten, "Flatten"}, {LayerKind::LSTM, "LSTM"},
};

std::string where(std::size_t i, LayerKind k) {
  return "layer " + std::to_string(i) + " (" + std::string(to_string(k)) + ")";
}

}  // namespace

std::string_view to_string(LayerKind k) {
  for (auto [kind, name] : kLayerNames)
    if (kind == k) return name;
  return "?";
}

std::optional<LayerKind> parse_layer_kind(std::string_view s) {
  for (auto [kind, name] : kLayerNames)
    if (name == s) return kind;
  return std::nullopt;
}

LayerSpec LayerSpec::conv(std::size_t out, std::size_t kernel, std::size_t stride,
                          std::size_t pad) {
  LayerSpec s;
  s.kind = LayerKind::Conv1D;
  s.out = out;
  s.kernel = kernel;
  s.stride = stride;
  s.pad = pad;
  return s;
}

LayerSpec LayerSpec::maxpool(std::size_t size) {
  LayerSpec s;
  s.kind = LayerKind::MaxPool1D;
  s.size = size;
  s.stride = size;
  return s;
}

LayerSpec LayerSpec::batchnorm(double eps, double momentum) {
  LayerSpec s;
  s.kind = LayerKind::BatchNorm1D;
  s.eps = eps;
  s.momentum = momentum;
  return s;
}

LayerSpec LayerSpec::dense(std::size_t out) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.out = out;
  return s;
}

LayerSpec LayerSpec::lstm(std::size_t hidden) {
  LayerSpec s;
  s.kind = LayerKind::LSTM;
  s.out = hidden;
  return s;
}

LayerSpec LayerSpec::dropout(double p) {
  LayerSpec s;
  s.kind = LayerKind::Dropout;
  s.p = p;
  return s;
}

LayerSpec LayerSpec::of(LayerKind k) {
  LayerSpec s;
  s.kind = k;
  return s;
}

nlohmann::json to_json(const ModelSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : spec.layers) {
    nlohmann::json j{{"kind", std::string(to_string(l.kind))}};
    switch (l.kind) {
      case LayerKind::Conv1D:
        j["out"] = l.out; j["kernel"] = l.kernel; j["stride"] = l.stride; j["pad"] = l.pad;
        break;
      case LayerKind::MaxPool1D: j["size"] = l.size; j["stride"] = l.stride; break;
      case LayerKind::BatchNorm1D: j["eps"] = l.eps; j["momentum"] = l.momentum; break;
      case LayerKind::Dense: case LayerKind::LSTM: j["out"] = l.out; break;
      case LayerKind::Dropout: j["p"] = l.p; break;
      default: break;
    }
    layers.push_back(j);
  }
  return {{"name", spec.name}, {"input", spec.input}, {"layers", layers}};
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  spec.name = j.value("name", "");
  spec.input = j.at("input").get<Shape>();
  for (const auto& l : j.at("layers")) {
    const auto kind = parse_layer_kind(l.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown layer kind " + l.at("kind").dump());
    LayerSpec s = LayerSpec::of(*kind);
    s.out = l.value("out", s.out);
    s.kernel = l.value("kernel", s.kernel);
    s.stride = l.value("stride", s.stride);
    s.pad = l.value("pad", s.pad);
    s.size = l.value("size", s.size);
    s.eps = l.value("eps", s.eps);
    s.momentum = l.value("momentum", s.momentum);
    s.p = l.value("p", s.p);
    spec.layers.push_back(s);
  }
  return spec;
}

std::string_view to_string(Preset p) {
  switch (p) {
    case Preset::CNN1D: return "cnn1d";
    case Preset::CRNN: return "crnn";
    case Preset::LSTM_RNN: return "lstm";
  }
  return "?";
}

std::optional<Preset> parse_preset(std::string_view s) {
  std::string l(s);
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "cnn1d" || l == "cnn") return Preset::CNN1D;
  if (l == "crnn") return Preset::CRNN;
  if (l == "lstm" || l == "lstm_rnn" || l == "lstm-rnn") return Preset::LSTM_RNN;
  return std::nullopt;
}

ModelSpec make_preset(Preset p, const Shape& input, std::size_t n_classes,
                      const PresetOptions& opt) {
  ModelSpec spec;
  spec.name = std::string(to_string(p));
  spec.input = input;
  auto add_block = [&](const ConvBlock& b) {
    spec.layers.push_back(LayerSpec::conv(b.channels, b.kernel, b.stride, b.pad));
    spec.layers.push_back(LayerSpec::maxpool(b.pool));
    spec.layers.push_back(LayerSpec::batchnorm());
    spec.layers.push_back(LayerSpec::of(LayerKind::ReLU));
  };
  switch (p) {
    case Preset::CNN1D:
      for (const auto& b : opt.conv) add_block(b);
      spec.layers.push_back(LayerSpec::of(LayerKind::Flatten));
      for (std::size_t w : opt.dense) {
        spec.layers.push_back(LayerSpec::dense(w));
        spec.layers.push_back(LayerSpec::of(LayerKind::ReLU));
        spec.layers.push_back(LayerSpec::dropout(opt.dropout));
      }
      break;
    case Preset::CRNN:
      for (std::size_t i = 0; i < std::min(opt.crnn_conv_blocks, opt.conv.size()); ++i)
        add_block(opt.conv[i]);
      spec.layers.push_back(LayerSpec::lstm(opt.lstm_hidden));
      break;
    case Preset::LSTM_RNN:
      spec.layers.push_back(LayerSpec::lstm(opt.lstm_hidden));
      break;
  }
  spec.layers.push_back(LayerSpec::dense(n_classes));
  spec.layers.push_back(LayerSpec::of(LayerKind::Softmax));
  return spec;
}

double cross_entropy(const Tensor& probs, const std::vector<int>& labels) {
  if (probs.shape.size() != 2 || probs.dim(0) != labels.size())
    throw std::invalid_argument("cross_entropy: expected (" + std::to_string(labels.size()) +
                                ", K) probabilities, got " + shape_string(probs.shape));
  const std::size_t B = probs.dim(0), K = probs.dim(1);
  double loss = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    if (labels[b] < 0 || static_cast<std::size_t>(labels[b]) >= K)
      throw std::out_of_range("cross_entropy: label " + std::to_string(labels[b]) +
                              " outside [0, " + std::to_string(K) + ")");
    loss -= std::log(std::max(probs.data[b * K + labels[b]], 1e-300));
  }
  return loss / double(B);
}

Model::Model(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
  if (spec_.layers.empty() || spec_.layers.back().kind != LayerKind::Softmax)
    throw std::invalid_argument("model must end with a Softmax layer");
  Shape cur = spec_.input;
  if (cur.empty()) throw ShapeError("model input shape is empty");
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& l = spec_.layers[i];
    if (l.kind == LayerKind::Softmax && i + 1 != spec_.layers.size())
      throw std::invalid_argument(where(i, l.kind) + ": Softmax is only allowed as the last layer");
    std::unique_ptr<Layer> layer;
    try {
      auto need = [&](std::size_t dims) {
        if (cur.size() != dims)
          throw ShapeError("expects a " + std::to_string(dims) + "-d per-sample input, got " +
                           shape_string(cur));
      };
      switch (l.kind) {
        case LayerKind::Conv1D:
          need(2);
          layer = std::make_unique<Conv1D>(cur[0], l.out, l.kernel, l.stride, l.pad);
          break;
        case LayerKind::MaxPool1D: layer = std::make_unique<MaxPool1D>(l.size, l.stride); break;
        case LayerKind::BatchNorm1D:
          layer = std::make_unique<BatchNorm1D>(cur.at(0), l.eps, l.momentum);
          break;
        case LayerKind::Dense:
          need(1);
          layer = std::make_unique<Dense>(cur[0], l.out);
          break;
        case LayerKind::ReLU: layer = std::make_unique<ReLU>(); break;
        case LayerKind::Tanh: layer = std::make_unique<Tanh>(); break;
        case LayerKind::Softmax: layer = std::make_unique<Softmax>(); break;
        case LayerKind::Dropout:
          layer = std::make_unique<Dropout>(l.p, seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
          break;
        case LayerKind::Flatten: layer = std::make_unique<Flatten>(); break;
        case LayerKind::LSTM:
          need(2);
          layer = std::make_unique<LSTM>(cur[0], l.out);
          break;
      }
      cur = layer->output_shape(cur);
    } catch (const std::invalid_argument& e) {
      throw ShapeError(where(i, l.kind) + ": " + e.what());
    }
    layers_.push_back(std::move(layer));
  }
  output_shape_ = cur;
  xavier_init(*this, seed);
}

Tensor Model::forward(const Tensor& batch, bool train) {
  Shape expected{batch.shape.empty() ? 0 : batch.shape[0]};
  expected.insert(expected.end(), spec_.input.begin(), spec_.input.end());
  if (batch.shape != expected || batch.shape[0] == 0)
    throw ShapeError("input: expected (B, " + shape_string(spec_.input).substr(1) +
                     ", got " + shape_string(batch.shape));
  Tensor x = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    try {
      x = layers_[i]->forward(x, train);
    } catch (const ShapeError& e) {
      throw ShapeError(where(i, spec_.layers[i].kind) + ": " + e.what());
    }
  }
  last_probs_ = x;
  trained_forward_ = train;
  return x;
}

Tensor Model::infer(const Tensor& batch) const {
  Shape expected{batch.shape.empty() ? 0 : batch.shape[0]};
  expected.insert(expected.end(), spec_.input.begin(), spec_.input.end());
  if (batch.shape != expected || batch.shape[0] == 0)
    throw ShapeError("input: expected (B, " + shape_string(spec_.input).substr(1) +
                     ", got " + shape_string(batch.shape));
  Tensor x = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    try {
      x = layers_[i]->infer(x);
    } catch (const ShapeError& e) {
      throw ShapeError(where(i, spec_.layers[i].kind) + ": " + e.what());
    }
  }
  return x;
}

void Model::backward(const Tensor& grad_probs) {
  if (!trained_forward_)
    throw std::logic_error("Model::backward requires a preceding train-mode forward");
  Tensor g = grad_probs;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
}

double Model::backward_from_labels(const std::vector<int>& labels) {
  if (!trained_forward_)
    throw std::logic_error("Model::backward requires a preceding train-mode forward");
  const double loss = cross_entropy(last_probs_, labels);
  const std::size_t B = last_probs_.dim(0), K = last_probs_.dim(1);
  Tensor g = last_probs_;
  for (std::size_t b = 0; b < B; ++b) {
    g.data[b * K + labels[b]] -= 1.0;
    for (std::size_t k = 0; k < K; ++k) g.data[b * K + k] /= double(B);
  }
  for (std::size_t i = layers_.size() - 1; i-- > 0;) g = layers_[i]->backward(g);
  return loss;
}

std::vector<Param*> Model::params() {
  std::vector<Param*> out;
  for (auto& l : layers_)
    for (Param* p : l->params()) out.push_back(p);
  return out;
}

std::vector<Tensor*> Model::buffers() {
  std::vector<Tensor*> out;
  for (auto& l : layers_)
    for (Tensor* t : l->buffers()) out.push_back(t);
  return out;
}

std::vector<Dropout*> Model::dropouts() {
  std::vector<Dropout*> out;
  for (auto& l : layers_)
    if (auto* d = dynamic_cast<Dropout*>(l.get())) out.push_back(d);
  return out;
}

void Model::zero_grad() {
  for (Param* p : params()) std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
}

std::size_t Model::num_parameters() {
  std::size_t n = 0;
  for (Param* p : params()) n += p->value.size();
  return n;
}

void xavier_init(Model& model, std::uint64_t seed) {
  Rng rng(seed);
  auto fill = [&](Param& p, double fan_in, double fan_out) {
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : p.value.data) v = rng.uniform(-a, a);
    std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
  };
  auto zero = [](Param& p) {
    std::fill(p.value.data.begin(), p.value.data.end(), 0.0);
    std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
  };
  for (std::size_t i = 0; i < model.num_layers(); ++i) {
    Layer& l = model.layer(i);
    if (auto* c = dynamic_cast<Conv1D*>(&l)) {
      const auto& s = c->weight().value.shape;  // (out, in, k)
      fill(c->weight(), double(s[1] * s[2]), double(s[0] * s[2]));
      zero(c->bias());
    } else if (auto* d = dynamic_cast<Dense*>(&l)) {
      const auto& s = d->weight().value.shape;  // (out, in)
      fill(d->weight(), double(s[1]), double(s[0]));
      zero(d->bias());
    } else if (auto* r = dynamic_cast<LSTM*>(&l)) {
      const auto& w = r->input_weight().value.shape;      // (4H, C)
      const auto& u = r->recurrent_weight().value.shape;  // (4H, H)
      fill(r->input_weight(), double(w[1]), double(w[0]));
      fill(r->recurrent_weight(), double(u[1]), double(u[0]));
      zero(r->bias());
    } else if (auto* bn = dynamic_cast<BatchNorm1D*>(&l)) {
      auto ps = bn->params();
      std::fill(ps[0]->value.data.begin(), ps[0]->value.data.end(), 1.0);
      std::fill(ps[0]->grad.data.begin(), ps[0]->grad.data.end(), 0.0);
      zero(*ps[1]);
      auto bufs = bn->buffers();
      std::fill(bufs[0]->data.begin(), bufs[0]->data.end(), 0.0);
      std::fill(bufs[1]->data.begin(), bufs[1]->data.end(), 1.0);
    }
  }
}

}  // namespace pcg::nn
