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

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pcgkit/nn/layers.hpp"

namespace pcg::nn {

enum class LayerKind {
  Conv1D, MaxPool1D, BatchNorm1D, Dense, ReLU, Tanh, Softmax, Dropout, Flatten, LSTM
};

std::string_view to_string(LayerKind k);
std::optional<LayerKind> parse_layer_kind(std::string_view s);

// Input-independent description of one layer; channel / feature counts are
// inferred from the previous layer's output when the model is built.
struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  std::size_t out = 0;     // Conv1D channels, Dense units, LSTM hidden size
  std::size_t kernel = 0;  // Conv1D
  std::size_t stride = 1;  // Conv1D, MaxPool1D (0 = size)
  std::size_t pad = 0;     // Conv1D
  std::size_t size = 0;    // MaxPool1D
  double eps = 1e-5;       // BatchNorm1D
  double momentum = 0.1;   // BatchNorm1D
  double p = 0.0;          // Dropout

  static LayerSpec conv(std::size_t out, std::size_t kernel, std::size_t stride, std::size_t pad);
  static LayerSpec maxpool(std::size_t size);
  static LayerSpec batchnorm(double eps = 1e-5, double momentum = 0.1);
  static LayerSpec dense(std::size_t out);
  static LayerSpec lstm(std::size_t hidden);
  static LayerSpec dropout(double p);
  static LayerSpec of(LayerKind k);

  bool operator==(const LayerSpec&) const = default;
};

struct ModelSpec {
  std::string name;
  Shape input;  // per-sample: (C, L) for feature maps
  std::vector<LayerSpec> layers;

  bool operator==(const ModelSpec&) const = default;
};

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

enum class Preset { CNN1D, CRNN, LSTM_RNN };
std::string_view to_string(Preset p);
std::optional<Preset> parse_preset(std::string_view s);

struct ConvBlock {
  std::size_t channels;
  std::size_t kernel = 16;
  std::size_t stride = 2;
  std::size_t pad = 8;
  std::size_t pool = 2;
};

struct PresetOptions {
  std::vector<ConvBlock> conv{{8}, {16}, {32}, {64}};
  std::vector<std::size_t> dense{256, 128, 64};
  double dropout = 0.25;
  std::size_t lstm_hidden = 128;
  std::size_t crnn_conv_blocks = 2;
};

// CNN1D: conv blocks [Conv -> MaxPool -> BatchNorm -> ReLU] -> Flatten ->
// Dense/ReLU/Dropout for each hidden width -> Dense(n) -> Softmax.
// CRNN: the first crnn_conv_blocks blocks -> LSTM -> Dense(n) -> Softmax.
// LSTM_RNN: LSTM -> Dense(n) -> Softmax.
ModelSpec make_preset(Preset p, const Shape& input, std::size_t n_classes,
                      const PresetOptions& opt = {});

// Cross-entropy mean over the batch, -log p[label]. Throws on bad labels.
double cross_entropy(const Tensor& probs, const std::vector<int>& labels);

class Model {
 public:
  // Builds every layer and draws Xavier-uniform weights from `seed`.
  Model(ModelSpec spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t num_classes() const { return output_shape_.at(0); }
  const Shape& output_shape() const { return output_shape_; }

  // Returns class probabilities (B, K). Shape errors name the layer index.
  Tensor forward(const Tensor& batch, bool train);
  // Eval-mode forward that leaves the model untouched; safe to call from
  // several threads on a model nobody is training.
  Tensor infer(const Tensor& batch) const;

  // Backpropagates d loss / d probs through every layer.
  void backward(const Tensor& grad_probs);
  // Fused softmax + cross-entropy: feeds (p - onehot) / B to the layer
  // below the softmax. Returns the loss of the last forward.
  double backward_from_labels(const std::vector<int>& labels);

  std::vector<Param*> params();
  std::vector<Tensor*> buffers();
  std::vector<Dropout*> dropouts();
  void zero_grad();
  std::size_t num_parameters();

  Layer& layer(std::size_t i) { return *layers_.at(i); }
  std::size_t num_layers() const { return layers_.size(); }

 private:
  ModelSpec spec_;
  std::uint64_t seed_;
  std::vector<std::unique_ptr<Layer>> layers_;
  Shape output_shape_;
  Tensor last_probs_;
  bool trained_forward_ = false;
};

// Re-draws every weight uniform in +-sqrt(6 / (fan_in + fan_out)), zeroes
// biases and resets batch-norm state.
void xavier_init(Model& model, std::uint64_t seed);

}  // namespace pcg::nn
