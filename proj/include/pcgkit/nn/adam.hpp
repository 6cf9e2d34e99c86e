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
#include <vector>

#include "pcgkit/nn/tensor.hpp"

namespace pcg::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment buffers are created lazily on the
// first step and matched to parameters by position.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Applies one update from the accumulated gradients, then clears them.
  void step(const std::vector<Param*>& params);

  AdamConfig& config() { return cfg_; }
  const AdamConfig& config() const { return cfg_; }
  std::uint64_t steps() const { return t_; }

  // Serialized state for checkpoints.
  struct State {
    std::uint64_t t = 0;
    std::vector<std::vector<double>> m, v;
  };
  State state() const { return {t_, m_, v_}; }
  void set_state(State s);

 private:
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace pcg::nn
