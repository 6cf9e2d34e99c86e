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

#include "pcgkit/nn/layers.hpp"

#include <algorithm>
#include <cmath>

namespace pcg::nn {
namespace {

void require_forward(bool cached, const char* kind) {
  if (!cached)
    throw std::logic_error(std::string(kind) + ": backward called before forward");
}

void require_same(const Tensor& g, const Shape& expected, const char* kind) {
  if (g.shape != expected)
    throw ShapeError(std::string(kind) + ": gradient shape " + shape_string(g.shape) +
                     " does not match output shape " + shape_string(expected));
}

Param make_param(std::string name, Shape shape) {
  return {std::move(name), Tensor(shape), Tensor(shape)};
}

Shape batch_shape(std::size_t b, const Shape& per_sample) {
  Shape s{b};
  s.insert(s.end(), per_sample.begin(), per_sample.end());
  return s;
}

Shape per_sample(const Tensor& x) {
  if (x.shape.empty()) throw ShapeError("tensor has no batch dimension");
  return {x.shape.begin() + 1, x.shape.end()};
}

// Valid output range of t for kernel tap j: 0 <= t*s + j - p < len.
void tap_range(std::size_t j, std::size_t s, std::size_t p, std::size_t len, std::size_t lout,
               std::size_t& lo, std::size_t& hi) {
  lo = j >= p ? 0 : (p - j + s - 1) / s;
  // largest t with t*s + j - p <= len - 1
  if (len + p < j + 1) {
    lo = hi = 0;
    return;
  }
  hi = std::min(lout, (len - 1 + p - j) / s + 1);
  if (lo > hi) lo = hi;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

// ---------------------------------------------------------------- Conv1D

Conv1D::Conv1D(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride,
               std::size_t pad)
    : in_(in_ch), out_(out_ch), k_(kernel), stride_(stride), pad_(pad),
      w_(make_param("weight", {out_ch, in_ch, kernel})), b_(make_param("bias", {out_ch})) {
  if (in_ch == 0 || out_ch == 0 || kernel == 0 || stride == 0)
    throw std::invalid_argument("Conv1D: channels, kernel and stride must be positive");
}

Shape Conv1D::output_shape(const Shape& in) const {
  if (in.size() != 2 || in[0] != in_)
    throw ShapeError("Conv1D expects (" + std::to_string(in_) + ", L) input, got " +
                     shape_string(in));
  if (in[1] + 2 * pad_ < k_)
    throw ShapeError("Conv1D: length " + std::to_string(in[1]) + " with padding " +
                     std::to_string(pad_) + " is shorter than kernel " + std::to_string(k_));
  return {out_, (in[1] + 2 * pad_ - k_) / stride_ + 1};
}

Tensor Conv1D::infer(const Tensor& x) const {
  const Shape os = output_shape(per_sample(x));
  const std::size_t B = x.dim(0), L = x.dim(2), lout = os[1];
  Tensor y(batch_shape(B, os));
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t o = 0; o < out_; ++o) {
      double* yr = &y.data[(b * out_ + o) * lout];
      std::fill(yr, yr + lout, b_.value.data[o]);
      for (std::size_t c = 0; c < in_; ++c) {
        const double* xr = &x.data[(b * in_ + c) * L];
        const double* wr = &w_.value.data[(o * in_ + c) * k_];
        for (std::size_t j = 0; j < k_; ++j) {
          std::size_t lo, hi;
          tap_range(j, stride_, pad_, L, lout, lo, hi);
          const double w = wr[j];
          for (std::size_t t = lo; t < hi; ++t) yr[t] += w * xr[t * stride_ + j - pad_];
        }
      }
    }
  return y;
}

Tensor Conv1D::forward(const Tensor& x, bool) {
  Tensor y = infer(x);
  x_ = x;
  cached_ = true;
  return y;
}

Tensor Conv1D::backward(const Tensor& g) {
  require_forward(cached_, "Conv1D");
  const std::size_t B = x_.dim(0), L = x_.dim(2);
  require_same(g, batch_shape(B, output_shape(per_sample(x_))), "Conv1D");
  const std::size_t lout = g.dim(2);
  Tensor dx(x_.shape);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t o = 0; o < out_; ++o) {
      const double* gr = &g.data[(b * out_ + o) * lout];
      double gs = 0.0;
      for (std::size_t t = 0; t < lout; ++t) gs += gr[t];
      b_.grad.data[o] += gs;
      for (std::size_t c = 0; c < in_; ++c) {
        const double* xr = &x_.data[(b * in_ + c) * L];
        double* dxr = &dx.data[(b * in_ + c) * L];
        const double* wr = &w_.value.data[(o * in_ + c) * k_];
        double* dwr = &w_.grad.data[(o * in_ + c) * k_];
        for (std::size_t j = 0; j < k_; ++j) {
          std::size_t lo, hi;
          tap_range(j, stride_, pad_, L, lout, lo, hi);
          const double w = wr[j];
          double acc = 0.0;
          for (std::size_t t = lo; t < hi; ++t) {
            const std::size_t i = t * stride_ + j - pad_;
            acc += gr[t] * xr[i];
            dxr[i] += w * gr[t];
          }
          dwr[j] += acc;
        }
      }
    }
  return dx;
}

// ------------------------------------------------------------- MaxPool1D

MaxPool1D::MaxPool1D(std::size_t size, std::size_t stride)
    : size_(size), stride_(stride == 0 ? size : stride) {
  if (size == 0) throw std::invalid_argument("MaxPool1D: size must be positive");
}

Shape MaxPool1D::output_shape(const Shape& in) const {
  if (in.size() != 2) throw ShapeError("MaxPool1D expects (C, L) input, got " + shape_string(in));
  if (in[1] < size_)
    throw ShapeError("MaxPool1D: length " + std::to_string(in[1]) + " shorter than window " +
                     std::to_string(size_));
  return {in[0], (in[1] - size_) / stride_ + 1};
}

Tensor MaxPool1D::run(const Tensor& x, std::vector<std::size_t>* argmax) const {
  const Shape os = output_shape(per_sample(x));
  const std::size_t B = x.dim(0), C = x.dim(1), L = x.dim(2), lout = os[1];
  Tensor y(batch_shape(B, os));
  if (argmax) argmax->assign(y.size(), 0);
  for (std::size_t r = 0; r < B * C; ++r) {
    const double* xr = &x.data[r * L];
    for (std::size_t t = 0; t < lout; ++t) {
      std::size_t best = t * stride_;
      for (std::size_t i = best + 1; i < t * stride_ + size_; ++i)
        if (xr[i] > xr[best]) best = i;
      y.data[r * lout + t] = xr[best];
      if (argmax) (*argmax)[r * lout + t] = r * L + best;
    }
  }
  return y;
}

Tensor MaxPool1D::infer(const Tensor& x) const { return run(x, nullptr); }

Tensor MaxPool1D::forward(const Tensor& x, bool) {
  Tensor y = run(x, &argmax_);
  in_shape_ = x.shape;
  cached_ = true;
  return y;
}

Tensor MaxPool1D::backward(const Tensor& g) {
  require_forward(cached_, "MaxPool1D");
  if (g.size() != argmax_.size())
    throw ShapeError("MaxPool1D: gradient shape " + shape_string(g.shape) + " does not match output");
  Tensor dx(in_shape_);
  for (std::size_t i = 0; i < g.size(); ++i) dx.data[argmax_[i]] += g.data[i];
  return dx;
}

// ----------------------------------------------------------- BatchNorm1D

BatchNorm1D::BatchNorm1D(std::size_t features, double eps, double momentum)
    : f_(features), eps_(eps), momentum_(momentum),
      gamma_(make_param("gamma", {features})), beta_(make_param("beta", {features})),
      running_mean_(Shape{features}, 0.0), running_var_(Shape{features}, 1.0) {
  if (features == 0) throw std::invalid_argument("BatchNorm1D: features must be positive");
  std::fill(gamma_.value.data.begin(), gamma_.value.data.end(), 1.0);
}

Shape BatchNorm1D::output_shape(const Shape& in) const {
  if ((in.size() != 1 && in.size() != 2) || in[0] != f_)
    throw ShapeError("BatchNorm1D expects (" + std::to_string(f_) + ") or (" +
                     std::to_string(f_) + ", L) input, got " + shape_string(in));
  return in;
}

void BatchNorm1D::check(const Tensor& x) const { output_shape(per_sample(x)); }

Tensor BatchNorm1D::infer(const Tensor& x) const {
  check(x);
  const std::size_t B = x.dim(0), L = x.shape.size() == 3 ? x.dim(2) : 1;
  Tensor y(x.shape);
  for (std::size_t c = 0; c < f_; ++c) {
    const double inv = 1.0 / std::sqrt(running_var_.data[c] + eps_);
    const double g = gamma_.value.data[c], be = beta_.value.data[c], m = running_mean_.data[c];
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t t = 0; t < L; ++t) {
        const std::size_t i = (b * f_ + c) * L + t;
        y.data[i] = g * ((x.data[i] - m) * inv) + be;
      }
  }
  return y;
}

Tensor BatchNorm1D::forward(const Tensor& x, bool train) {
  check(x);
  const std::size_t B = x.dim(0), L = x.shape.size() == 3 ? x.dim(2) : 1;
  const double n = double(B * L);
  xhat_ = Tensor(x.shape);
  inv_std_.assign(f_, 0.0);
  Tensor y(x.shape);
  for (std::size_t c = 0; c < f_; ++c) {
    double mean, var;
    if (train) {
      double s = 0.0;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < L; ++t) s += x.data[(b * f_ + c) * L + t];
      mean = s / n;
      double ss = 0.0;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < L; ++t) {
          const double d = x.data[(b * f_ + c) * L + t] - mean;
          ss += d * d;
        }
      var = ss / n;
      running_mean_.data[c] = (1 - momentum_) * running_mean_.data[c] + momentum_ * mean;
      const double unbiased = n > 1 ? var * n / (n - 1) : var;
      running_var_.data[c] = (1 - momentum_) * running_var_.data[c] + momentum_ * unbiased;
    } else {
      mean = running_mean_.data[c];
      var = running_var_.data[c];
    }
    const double inv = 1.0 / std::sqrt(var + eps_);
    inv_std_[c] = inv;
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t t = 0; t < L; ++t) {
        const std::size_t i = (b * f_ + c) * L + t;
        xhat_.data[i] = (x.data[i] - mean) * inv;
        y.data[i] = gamma_.value.data[c] * xhat_.data[i] + beta_.value.data[c];
      }
  }
  cached_ = true;
  cached_train_ = train;
  return y;
}

Tensor BatchNorm1D::backward(const Tensor& g) {
  require_forward(cached_, "BatchNorm1D");
  require_same(g, xhat_.shape, "BatchNorm1D");
  const std::size_t B = g.dim(0), L = g.shape.size() == 3 ? g.dim(2) : 1;
  const double n = double(B * L);
  Tensor dx(g.shape);
  for (std::size_t c = 0; c < f_; ++c) {
    double sg = 0.0, sgx = 0.0;
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t t = 0; t < L; ++t) {
        const std::size_t i = (b * f_ + c) * L + t;
        sg += g.data[i];
        sgx += g.data[i] * xhat_.data[i];
      }
    gamma_.grad.data[c] += sgx;
    beta_.grad.data[c] += sg;
    const double k = gamma_.value.data[c] * inv_std_[c];
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t t = 0; t < L; ++t) {
        const std::size_t i = (b * f_ + c) * L + t;
        dx.data[i] = cached_train_ ? k * (g.data[i] - sg / n - xhat_.data[i] * sgx / n)
                                   : k * g.data[i];
      }
  }
  return dx;
}

// ----------------------------------------------------------------- Dense

Dense::Dense(std::size_t in, std::size_t out)
    : in_(in), out_(out), w_(make_param("weight", {out, in})), b_(make_param("bias", {out})) {
  if (in == 0 || out == 0) throw std::invalid_argument("Dense: sizes must be positive");
}

Shape Dense::output_shape(const Shape& in) const {
  if (in.size() != 1 || in[0] != in_)
    throw ShapeError("Dense expects (" + std::to_string(in_) + ") input, got " +
                     shape_string(in));
  return {out_};
}

Tensor Dense::infer(const Tensor& x) const {
  output_shape(per_sample(x));
  const std::size_t B = x.dim(0);
  Tensor y({B, out_});
  for (std::size_t b = 0; b < B; ++b) {
    const double* xr = &x.data[b * in_];
    for (std::size_t o = 0; o < out_; ++o) {
      const double* wr = &w_.value.data[o * in_];
      double acc = b_.value.data[o];
      for (std::size_t i = 0; i < in_; ++i) acc += wr[i] * xr[i];
      y.data[b * out_ + o] = acc;
    }
  }
  return y;
}

Tensor Dense::forward(const Tensor& x, bool) {
  Tensor y = infer(x);
  x_ = x;
  cached_ = true;
  return y;
}

Tensor Dense::backward(const Tensor& g) {
  require_forward(cached_, "Dense");
  const std::size_t B = x_.dim(0);
  require_same(g, {B, out_}, "Dense");
  Tensor dx(x_.shape);
  for (std::size_t b = 0; b < B; ++b) {
    const double* xr = &x_.data[b * in_];
    double* dxr = &dx.data[b * in_];
    for (std::size_t o = 0; o < out_; ++o) {
      const double go = g.data[b * out_ + o];
      if (go == 0.0) continue;
      b_.grad.data[o] += go;
      const double* wr = &w_.value.data[o * in_];
      double* dwr = &w_.grad.data[o * in_];
      for (std::size_t i = 0; i < in_; ++i) {
        dwr[i] += go * xr[i];
        dxr[i] += go * wr[i];
      }
    }
  }
  return dx;
}

// ------------------------------------------------------- ReLU, Tanh

Tensor ReLU::infer(const Tensor& x) const {
  Tensor y = x;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor ReLU::forward(const Tensor& x, bool) {
  x_ = x;
  cached_ = true;
  return infer(x);
}

Tensor ReLU::backward(const Tensor& g) {
  require_forward(cached_, "ReLU");
  require_same(g, x_.shape, "ReLU");
  Tensor dx = g;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(x_.data[i] > 0.0)) dx.data[i] = 0.0;
  return dx;
}

Tensor Tanh::infer(const Tensor& x) const {
  Tensor y = x;
  for (double& v : y.data) v = std::tanh(v);
  return y;
}

Tensor Tanh::forward(const Tensor& x, bool) {
  y_ = infer(x);
  cached_ = true;
  return y_;
}

Tensor Tanh::backward(const Tensor& g) {
  require_forward(cached_, "Tanh");
  require_same(g, y_.shape, "Tanh");
  Tensor dx = g;
  for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= 1.0 - y_.data[i] * y_.data[i];
  return dx;
}

// --------------------------------------------------------------- Softmax

Shape Softmax::output_shape(const Shape& in) const {
  if (in.size() != 1 || in[0] == 0)
    throw ShapeError("Softmax expects (K) input, got " + shape_string(in));
  return in;
}

Tensor Softmax::infer(const Tensor& x) const {
  output_shape(per_sample(x));
  const std::size_t B = x.dim(0), K = x.dim(1);
  Tensor y(x.shape);
  for (std::size_t b = 0; b < B; ++b) {
    const double* xr = &x.data[b * K];
    double* yr = &y.data[b * K];
    const double m = *std::max_element(xr, xr + K);
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += (yr[k] = std::exp(xr[k] - m));
    for (std::size_t k = 0; k < K; ++k) yr[k] /= s;
  }
  return y;
}

Tensor Softmax::forward(const Tensor& x, bool) {
  y_ = infer(x);
  cached_ = true;
  return y_;
}

Tensor Softmax::backward(const Tensor& g) {
  require_forward(cached_, "Softmax");
  require_same(g, y_.shape, "Softmax");
  const std::size_t B = g.dim(0), K = g.dim(1);
  Tensor dx(g.shape);
  for (std::size_t b = 0; b < B; ++b) {
    double dot = 0.0;
    for (std::size_t k = 0; k < K; ++k) dot += g.data[b * K + k] * y_.data[b * K + k];
    for (std::size_t k = 0; k < K; ++k)
      dx.data[b * K + k] = y_.data[b * K + k] * (g.data[b * K + k] - dot);
  }
  return dx;
}

// --------------------------------------------------------------- Dropout

Dropout::Dropout(double p, std::uint64_t seed) : p_(p), rng_(seed) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("Dropout: p must be in [0, 1)");
}

Tensor Dropout::forward(const Tensor& x, bool train) {
  cached_ = true;
  eval_pass_ = !train;
  if (!train) return x;
  if (!frozen_ || mask_.size() != x.size()) {
    mask_.resize(x.size());
    const double keep = 1.0 / (1.0 - p_);
    for (double& m : mask_) m = rng_.uniform() < p_ ? 0.0 : keep;
  }
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] *= mask_[i];
  return y;
}

Tensor Dropout::backward(const Tensor& g) {
  require_forward(cached_, "Dropout");
  if (eval_pass_) return g;
  if (g.size() != mask_.size()) throw ShapeError("Dropout: gradient shape mismatch");
  Tensor dx = g;
  for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= mask_[i];
  return dx;
}

// --------------------------------------------------------------- Flatten

Shape Flatten::output_shape(const Shape& in) const {
  if (in.empty()) throw ShapeError("Flatten: empty input shape");
  return {shape_size(in)};
}

Tensor Flatten::infer(const Tensor& x) const {
  const Shape os = output_shape(per_sample(x));
  return Tensor({x.dim(0), os[0]}, x.data);
}

Tensor Flatten::forward(const Tensor& x, bool) {
  in_shape_ = x.shape;
  cached_ = true;
  return infer(x);
}

Tensor Flatten::backward(const Tensor& g) {
  require_forward(cached_, "Flatten");
  if (g.size() != shape_size(in_shape_)) throw ShapeError("Flatten: gradient shape mismatch");
  return Tensor(in_shape_, g.data);
}

// ------------------------------------------------------------------ LSTM

LSTM::LSTM(std::size_t in, std::size_t hidden)
    : in_(in), h_(hidden), w_(make_param("input_weight", {4 * hidden, in})),
      u_(make_param("recurrent_weight", {4 * hidden, hidden})),
      b_(make_param("bias", {4 * hidden})) {
  if (in == 0 || hidden == 0) throw std::invalid_argument("LSTM: sizes must be positive");
}

Shape LSTM::output_shape(const Shape& in) const {
  if (in.size() != 2 || in[0] != in_ || in[1] == 0)
    throw ShapeError("LSTM expects (" + std::to_string(in_) + ", T) input, got " +
                     shape_string(in));
  return {h_};
}

void LSTM::check(const Tensor& x) const { output_shape(per_sample(x)); }

Tensor LSTM::run(const Tensor& x, Trace* tr) const {
  check(x);
  const std::size_t B = x.dim(0), C = in_, T = x.dim(2), H = h_, G = 4 * H;
  std::vector<double> h(B * H, 0.0), c(B * H, 0.0), z(G), xt(C);
  if (tr) {
    tr->batch = B;
    tr->steps = T;
    tr->gates.assign(T * B * G, 0.0);
    tr->c.assign((T + 1) * B * H, 0.0);
    tr->h.assign((T + 1) * B * H, 0.0);
  }
  const double* W = w_.value.data.data();
  const double* U = u_.value.data.data();
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t k = 0; k < C; ++k) xt[k] = x.data[(b * C + k) * T + t];
      double* hb = &h[b * H];
      double* cb = &c[b * H];
      for (std::size_t r = 0; r < G; ++r) {
        double acc = b_.value.data[r];
        const double* wr = W + r * C;
        for (std::size_t k = 0; k < C; ++k) acc += wr[k] * xt[k];
        const double* ur = U + r * H;
        for (std::size_t k = 0; k < H; ++k) acc += ur[k] * hb[k];
        z[r] = acc;
      }
      for (std::size_t j = 0; j < H; ++j) {
        const double i = sigmoid(z[j]), f = sigmoid(z[H + j]);
        const double g = std::tanh(z[2 * H + j]), o = sigmoid(z[3 * H + j]);
        cb[j] = f * cb[j] + i * g;
        hb[j] = o * std::tanh(cb[j]);
        if (tr) {
          double* gt = &tr->gates[(t * B + b) * G];
          gt[j] = i;
          gt[H + j] = f;
          gt[2 * H + j] = g;
          gt[3 * H + j] = o;
        }
      }
      if (tr) {
        std::copy(cb, cb + H, &tr->c[((t + 1) * B + b) * H]);
        std::copy(hb, hb + H, &tr->h[((t + 1) * B + b) * H]);
      }
    }
  return Tensor({B, H}, h);
}

Tensor LSTM::infer(const Tensor& x) const { return run(x, nullptr); }

Tensor LSTM::forward(const Tensor& x, bool) {
  Tensor y = run(x, &trace_);
  x_ = x;
  cached_ = true;
  return y;
}

Tensor LSTM::backward(const Tensor& g) {
  require_forward(cached_, "LSTM");
  const std::size_t B = trace_.batch, T = trace_.steps, C = in_, H = h_, G = 4 * H;
  require_same(g, {B, H}, "LSTM");
  Tensor dx(x_.shape);
  std::vector<double> dh(g.data), dc(B * H, 0.0), dz(G), dh_prev(H);
  const double* W = w_.value.data.data();
  const double* U = u_.value.data.data();
  double* dW = w_.grad.data.data();
  double* dU = u_.grad.data.data();
  double* db = b_.grad.data.data();
  std::vector<double> xt(C);
  for (std::size_t t = T; t-- > 0;)
    for (std::size_t b = 0; b < B; ++b) {
      const double* gt = &trace_.gates[(t * B + b) * G];
      const double* c_now = &trace_.c[((t + 1) * B + b) * H];
      const double* c_prev = &trace_.c[(t * B + b) * H];
      const double* h_prev = &trace_.h[(t * B + b) * H];
      double* dhb = &dh[b * H];
      double* dcb = &dc[b * H];
      for (std::size_t j = 0; j < H; ++j) {
        const double i = gt[j], f = gt[H + j], gg = gt[2 * H + j], o = gt[3 * H + j];
        const double tc = std::tanh(c_now[j]);
        const double d_o = dhb[j] * tc;
        const double d_c = dcb[j] + dhb[j] * o * (1.0 - tc * tc);
        dz[j] = d_c * gg * i * (1.0 - i);
        dz[H + j] = d_c * c_prev[j] * f * (1.0 - f);
        dz[2 * H + j] = d_c * i * (1.0 - gg * gg);
        dz[3 * H + j] = d_o * o * (1.0 - o);
        dcb[j] = d_c * f;
      }
      for (std::size_t k = 0; k < C; ++k) xt[k] = x_.data[(b * C + k) * T + t];
      std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
      std::vector<double> dxt(C, 0.0);
      for (std::size_t r = 0; r < G; ++r) {
        const double d = dz[r];
        if (d == 0.0) continue;
        db[r] += d;
        const double* wr = W + r * C;
        double* dwr = dW + r * C;
        for (std::size_t k = 0; k < C; ++k) {
          dwr[k] += d * xt[k];
          dxt[k] += d * wr[k];
        }
        const double* ur = U + r * H;
        double* dur = dU + r * H;
        for (std::size_t k = 0; k < H; ++k) {
          dur[k] += d * h_prev[k];
          dh_prev[k] += d * ur[k];
        }
      }
      for (std::size_t k = 0; k < C; ++k) dx.data[(b * C + k) * T + t] = dxt[k];
      std::copy(dh_prev.begin(), dh_prev.end(), dhb);
    }
  return dx;
}

}  // namespace pcg::nn
