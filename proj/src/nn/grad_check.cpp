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

#include "pcgkit/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace pcg::nn {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

Tensor random_input(Rng& rng, const Shape& shape, const GradCheckOptions& opt) {
  Tensor x(shape);
  for (double& v : x.data) {
    const double mag = opt.min_abs_input + (opt.input_scale - opt.min_abs_input) * rng.uniform();
    v = rng.uniform() < 0.5 ? -mag : mag;
  }
  return x;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

// Central difference of f with respect to v[i].
template <typename F>
double numeric(std::vector<double>& v, std::size_t i, double h, F&& f) {
  const double keep = v[i];
  v[i] = keep + h;
  const double up = f();
  v[i] = keep - h;
  const double down = f();
  v[i] = keep;
  return (up - down) / (2.0 * h);
}

}  // namespace

GradCheckReport grad_check(Layer& layer, const Shape& input_shape, const GradCheckOptions& opt) {
  Rng rng(opt.seed);
  Tensor x = random_input(rng, input_shape, opt);
  auto* dropout = dynamic_cast<Dropout*>(&layer);
  if (dropout) dropout->freeze_mask(false);
  Tensor y = layer.forward(x, true);
  if (dropout) dropout->freeze_mask(true);
  Tensor r(y.shape);
  for (double& v : r.data) v = rng.uniform(-1.0, 1.0);

  for (Param* p : layer.params()) std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
  const Tensor dx = layer.backward(r);
  std::vector<std::vector<double>> pgrads;
  for (Param* p : layer.params()) pgrads.push_back(p->grad.data);

  auto loss = [&] { return dot(r, layer.forward(x, true)); };
  GradCheckReport rep;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = numeric(x.data, i, opt.h, loss);
    rep.max_input_error = std::max(rep.max_input_error, relative_error(dx.data[i], n, opt.floor));
    ++rep.checked;
  }
  auto params = layer.params();
  for (std::size_t k = 0; k < params.size(); ++k)
    for (std::size_t i = 0; i < params[k]->value.size(); ++i) {
      const double n = numeric(params[k]->value.data, i, opt.h, loss);
      rep.max_param_error =
          std::max(rep.max_param_error, relative_error(pgrads[k][i], n, opt.floor));
      ++rep.checked;
    }
  if (dropout) dropout->freeze_mask(false);
  for (Param* p : layer.params()) std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
  return rep;
}

GradCheckReport grad_check_softmax_ce(std::size_t batch, std::size_t classes,
                                      const GradCheckOptions& opt) {
  Rng rng(opt.seed);
  Tensor z = random_input(rng, {batch, classes}, opt);
  std::vector<int> labels(batch);
  for (int& l : labels) l = static_cast<int>(rng.below(classes));
  Softmax sm;
  const Tensor p = sm.forward(z, true);
  Tensor analytic = p;
  for (std::size_t b = 0; b < batch; ++b) {
    analytic.data[b * classes + labels[b]] -= 1.0;
    for (std::size_t k = 0; k < classes; ++k) analytic.data[b * classes + k] /= double(batch);
  }
  auto loss = [&] { return cross_entropy(sm.infer(z), labels); };
  GradCheckReport rep;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double n = numeric(z.data, i, opt.h, loss);
    rep.max_input_error =
        std::max(rep.max_input_error, relative_error(analytic.data[i], n, opt.floor));
    ++rep.checked;
  }
  return rep;
}

GradCheckReport grad_check_model(Model& model, std::size_t batch, const GradCheckOptions& opt) {
  Rng rng(opt.seed);
  Shape shape{batch};
  shape.insert(shape.end(), model.spec().input.begin(), model.spec().input.end());
  Tensor x = random_input(rng, shape, opt);
  std::vector<int> labels(batch);
  for (int& l : labels) l = static_cast<int>(rng.below(model.num_classes()));

  auto drops = model.dropouts();
  for (auto* d : drops) d->freeze_mask(false);
  model.zero_grad();
  model.forward(x, true);
  for (auto* d : drops) d->freeze_mask(true);
  model.backward_from_labels(labels);
  auto params = model.params();
  std::vector<std::vector<double>> pgrads;
  for (Param* p : params) pgrads.push_back(p->grad.data);

  auto loss = [&] { return cross_entropy(model.forward(x, true), labels); };
  GradCheckReport rep;
  // A deterministic sample of entries keeps big models affordable.
  constexpr std::size_t kPerTensor = 40;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const std::size_t n = params[k]->value.size();
    const std::size_t step = std::max<std::size_t>(1, n / kPerTensor);
    for (std::size_t i = 0; i < n; i += step) {
      const double num = numeric(params[k]->value.data, i, opt.h, loss);
      rep.max_param_error =
          std::max(rep.max_param_error, relative_error(pgrads[k][i], num, opt.floor));
      ++rep.checked;
    }
  }
  for (auto* d : drops) d->freeze_mask(false);
  model.zero_grad();
  return rep;
}

}  // namespace pcg::nn
