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

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcgkit/nn/tensor.hpp"

namespace pcg::nn {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A layer caches what it needs during forward() and consumes it in
// backward(). Parameter gradients accumulate until cleared.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  // Per-sample output shape for a per-sample input shape; throws ShapeError.
  virtual Shape output_shape(const Shape& in) const = 0;
  virtual Tensor forward(const Tensor& x, bool train) = 0;
  // Eval-mode forward without touching any cached state.
  virtual Tensor infer(const Tensor& x) const = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<Param*> params() { return {}; }
  // Non-learned state saved with the model (batch-norm running stats).
  virtual std::vector<Tensor*> buffers() { return {}; }
};

class Conv1D : public Layer {
 public:
  Conv1D(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride,
         std::size_t pad);
  std::string kind() const override { return "Conv1D"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x, bool train) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&w_, &b_}; }

  Param& weight() { return w_; }  // (out, in, kernel)
  Param& bias() { return b_; }

 private:
  std::size_t in_, out_, k_, stride_, pad_;
  Param w_, b_;
  Tensor x_;
  bool cached_ = false;
};

class MaxPool1D : public Layer {
 public:
  explicit MaxPool1D(std::size_t size, std::size_t stride = 0);
  std::string kind() const override { return "MaxPool1D"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x, bool train) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Tensor run(const Tensor& x, std::vector<std::size_t>* argmax) const;
  std::size_t size_, stride_;
  Shape in_shape_;
  std::vector<std::size_t> argmax_;
  bool cached_ = false;
};

// Normalizes each channel over batch and length ((B, C, L) input) or each
// feature over the batch ((B, F) input).
class BatchNorm1D : public Layer {
 public:
  BatchNorm1D(std::size_t features, double eps = 1e-5, double momentum = 0.1);
  std::string kind() const override { return "BatchNorm1D"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x, bool train) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&gamma_, &beta_}; }
  std::vector<Tensor*> buffers() override { return {&running_mean_, &running_var_}; }

  const Tensor& running_mean() const { return running_mean_; }
  const Tensor& running_var() const { return running_var_; }

 private:
  void check(const Tensor& x) const;
  std::size_t f_;
  double eps_, momentum_;
  Param gamma_, beta_;
  Tensor running_mean_, running_var_;
  Tensor xhat_;
  std::vector<double> inv_std_;
  bool cached_ = false;
  bool cached_train_ = false;
};

class Dense : public Layer {
 public:
  Dense(std::size_t in, std::size_t out);
  std::string kind() const override { return "Dense"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x, bool train) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&w_, &b_}; }

  Param& weight() { return w_; }  // (out, in)
  Param& bias() { return b_; }

 private:
  std::size_t in_, out_;
  Param w_, b_;
  Tensor x_;
  bool cached_ = false;
};

class ReLU : public Layer {
 public:
  std::string kind() const override { return "ReLU"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor forward(const Tensor& x, bool train) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Tensor x_;
  bool cached_ = false;
};

class Tanh : public Layer {
 public:
  std::string kind() const override { return "Tanh"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor forward(const Tensor& x, bool train) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Tensor y_;
  bool cached_ = false;
};

// Row-wise softmax over (B, K) with max subtraction.
class Softmax : public Layer {
 public:
  std::string kind() const override { return "Softmax"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x, bool train) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  const Tensor& output() const { return y_; }

 private:
  Tensor y_;
  bool cached_ = false;
};

// Inverted dropout: kept units are scaled by 1/(1-p) in training, eval is
// the identity.
class Dropout : public Layer {
 public:
  Dropout(double p, std::uint64_t seed);
  std::string kind() const override { return "Dropout"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor forward(const Tensor& x, bool train) override;
  Tensor infer(const Tensor& x) const override { return x; }
  Tensor backward(const Tensor& grad_out) override;
  // Reuse the current mask on later forwards (finite-difference checks).
  void freeze_mask(bool on) { frozen_ = on; }
  Rng& rng() { return rng_; }

 private:
  double p_;
  Rng rng_;
  std::vector<double> mask_;
  bool frozen_ = false;
  bool eval_pass_ = false;
  bool cached_ = false;
};

class Flatten : public Layer {
 public:
  std::string kind() const override { return "Flatten"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x, bool train) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Shape in_shape_;
  bool cached_ = false;
};

// Single-layer LSTM over (B, C, T): step t reads the C values at time t.
// Gates (i, f, g, o) = W x_t + U h_{t-1} + b; output is the final h, (B, H).
class LSTM : public Layer {
 public:
  LSTM(std::size_t in, std::size_t hidden);
  std::string kind() const override { return "LSTM"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(const Tensor& x, bool train) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&w_, &u_, &b_}; }

  Param& input_weight() { return w_; }      // (4H, C)
  Param& recurrent_weight() { return u_; }  // (4H, H)
  Param& bias() { return b_; }              // (4H)

 private:
  struct Trace {
    std::size_t batch = 0, steps = 0;
    std::vector<double> gates;  // (T, B, 4H) post-activation
    std::vector<double> c;      // (T+1, B, H)
    std::vector<double> h;      // (T+1, B, H)
  };
  Tensor run(const Tensor& x, Trace* trace) const;
  void check(const Tensor& x) const;
  std::size_t in_, h_;
  Param w_, u_, b_;
  Tensor x_;
  Trace trace_;
  bool cached_ = false;
};

}  // namespace pcg::nn
