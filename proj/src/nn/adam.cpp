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

#include "pcgkit/nn/adam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pcg::nn {

void Adam::step(const std::vector<Param*>& params) {
  if (m_.empty()) {
    for (const Param* p : params) {
      m_.emplace_back(p->value.size(), 0.0);
      v_.emplace_back(p->value.size(), 0.0);
    }
  }
  if (m_.size() != params.size())
    throw std::invalid_argument("Adam: parameter list changed between steps");
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, double(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, double(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    auto& m = m_[i];
    auto& v = v_[i];
    if (m.size() != p.value.size())
      throw std::invalid_argument("Adam: parameter " + p.name + " changed size");
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double g = p.grad.data[k];
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g;
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[k] / c1, vhat = v[k] / c2;
      p.value.data[k] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
  }
}

void Adam::set_state(State s) {
  if (s.m.size() != s.v.size()) throw std::invalid_argument("Adam: inconsistent state");
  t_ = s.t;
  m_ = std::move(s.m);
  v_ = std::move(s.v);
}

}  // namespace pcg::nn
