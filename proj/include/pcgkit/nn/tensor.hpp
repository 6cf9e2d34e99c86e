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

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pcg::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& s);
std::string shape_string(const Shape& s);

// Dense row-major array. Activations are (batch, channels, length) or
// (batch, features).
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0) : shape(std::move(s)), data(shape_size(shape), fill) {}
  Tensor(Shape s, std::vector<double> d);

  std::size_t size() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  bool operator==(const Tensor&) const = default;
};

// Learnable parameter with its accumulated gradient.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
};

// mt19937_64 with a fixed uniform mapping, so draws are identical across
// standard libraries (std::uniform_real_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return gen_(); }
  // Uniform integer in [0, n).
  std::size_t below(std::size_t n);
  double normal();

  std::string state() const;
  void set_state(const std::string& s);

 private:
  std::mt19937_64 gen_;
};

}  // namespace pcg::nn
