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
#include <string>

#include "pcgkit/nn/layers.hpp"
#include "pcgkit/nn/model.hpp"

namespace pcg::nn {

struct GradCheckReport {
  double max_input_error = 0.0;
  double max_param_error = 0.0;
  std::size_t checked = 0;
  double max_error() const { return std::max(max_input_error, max_param_error); }
  bool passed(double tol) const { return max_error() < tol; }
};

struct GradCheckOptions {
  double h = 1e-4;
  // Relative error is |a - n| / max(|a|, |n|, floor).
  double floor = 1e-2;
  std::uint64_t seed = 1;
  // Inputs are drawn from +-input_scale, avoiding |x| < min_abs_input so
  // ReLU-like kinks are not straddled.
  double input_scale = 1.0;
  double min_abs_input = 0.0;
};

// Compares analytic gradients of L = sum(r * layer(x)), with fixed random r,
// against central differences, for the input and every parameter. The layer
// runs in train mode; dropout masks are frozen for the duration.
GradCheckReport grad_check(Layer& layer, const Shape& input_shape,
                           const GradCheckOptions& opt = {});

// Same for softmax followed by cross-entropy, using the fused (p - onehot)/B
// gradient with respect to the logits.
GradCheckReport grad_check_softmax_ce(std::size_t batch, std::size_t classes,
                                      const GradCheckOptions& opt = {});

// End-to-end check of Model::backward_from_labels on the cross-entropy loss.
GradCheckReport grad_check_model(Model& model, std::size_t batch,
                                 const GradCheckOptions& opt = {});

double relative_error(double analytic, double numeric, double floor);

}  // namespace pcg::nn
