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
#include <map>
#include <vector>

#include "pcgkit/nn/tensor.hpp"
#include "pcgkit/pipeline/manifest.hpp"

namespace pcg::pipeline {

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

// Assigns whole patients to splits. Patients are sorted by id, shuffled
// with `seed`, and cut into round(n*val) val and round(n*test) test
// patients (each at least one), the rest train. Throws with fewer than
// three patients or ratios that do not sum to 1.
void split_patients(DatasetManifest& m, const SplitRatios& ratios, std::uint64_t seed);

// 1/n(c) per class over the given split, in `classes` order. Throws when
// the split is empty or a class has no samples.
std::vector<double> class_weights(const DatasetManifest& m, const std::vector<ClassLabel>& classes,
                                  Split split = Split::Train);

// Draws indices with replacement, P(i) proportional to weights[i].
class WeightedSampler {
 public:
  WeightedSampler(std::vector<double> weights, std::uint64_t seed);

  std::size_t draw();
  // `n` draws; an epoch uses n = number of instances.
  std::vector<std::size_t> epoch(std::size_t n);
  std::size_t size() const { return cumulative_.size(); }
  nn::Rng& rng() { return rng_; }

 private:
  std::vector<double> cumulative_;
  nn::Rng rng_;
};

// Fisher-Yates with nn::Rng, identical on every platform.
template <typename T>
void shuffle(std::vector<T>& v, nn::Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

// Keeps a seeded random subset of `target` segments for each listed
// effective label; other classes are untouched and entry order is kept.
// Throws if a target exceeds the available count.
void downsample_majority(DatasetManifest& m, const std::map<ClassLabel, std::size_t>& targets,
                         std::uint64_t seed);

}  // namespace pcg::pipeline
