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

#include "pcgkit/pipeline/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pcg::pipeline {

void split_patients(DatasetManifest& m, const SplitRatios& r, std::uint64_t seed) {
  if (r.train < 0 || r.val < 0 || r.test < 0 || std::abs(r.train + r.val + r.test - 1.0) > 1e-9)
    throw ManifestError("split ratios must be non-negative and sum to 1");
  std::set<std::string> ids;
  for (const auto& e : m.entries) ids.insert(e.patient_id);
  const std::size_t n = ids.size();
  if (n < 3)
    throw ManifestError("need at least 3 patients to split, have " + std::to_string(n));
  std::vector<std::string> patients(ids.begin(), ids.end());
  nn::Rng rng(seed);
  shuffle(patients, rng);
  const auto part = [n](double f) {
    return std::max<std::size_t>(1, std::size_t(std::llround(double(n) * f)));
  };
  const std::size_t n_val = part(r.val), n_test = part(r.test);
  if (n_val + n_test >= n) throw ManifestError("split leaves no training patients");
  std::map<std::string, Split> assign;
  for (std::size_t i = 0; i < n; ++i)
    assign[patients[i]] = i < n_test ? Split::Test : (i < n_test + n_val ? Split::Val : Split::Train);
  for (auto& e : m.entries) e.split = assign.at(e.patient_id);
}

std::vector<double> class_weights(const DatasetManifest& m, const std::vector<ClassLabel>& classes,
                                  Split split) {
  const auto n = class_counts(m, classes, split);
  std::vector<double> w;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (n[c] == 0)
      throw ManifestError("class " + std::string(pcg::to_string(classes[c])) + " has no " +
                          std::string(to_string(split)) + " samples");
    w.push_back(1.0 / double(n[c]));
  }
  return w;
}

WeightedSampler::WeightedSampler(std::vector<double> weights, std::uint64_t seed) : rng_(seed) {
  if (weights.empty()) throw std::invalid_argument("WeightedSampler: no instances");
  double acc = 0.0;
  cumulative_.reserve(weights.size());
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("WeightedSampler: weights must be positive and finite");
    acc += w;
    cumulative_.push_back(acc);
  }
}

std::size_t WeightedSampler::draw() {
  const double u = rng_.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1);
}

std::vector<std::size_t> WeightedSampler::epoch(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = draw();
  return out;
}

void downsample_majority(DatasetManifest& m, const std::map<ClassLabel, std::size_t>& targets,
                         std::uint64_t seed) {
  nn::Rng rng(seed);
  std::vector<bool> keep(m.entries.size(), true);
  for (auto [label, target] : targets) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < m.entries.size(); ++i)
      if (m.entries[i].effective == label) idx.push_back(i);
    if (target > idx.size())
      throw ManifestError("downsample target " + std::to_string(target) + " for " +
                          std::string(pcg::to_string(label)) + " exceeds the " +
                          std::to_string(idx.size()) + " available");
    shuffle(idx, rng);
    for (std::size_t k = target; k < idx.size(); ++k) keep[idx[k]] = false;
  }
  std::vector<ManifestEntry> out;
  for (std::size_t i = 0; i < m.entries.size(); ++i)
    if (keep[i]) out.push_back(std::move(m.entries[i]));
  m.entries = std::move(out);
}

}  // namespace pcg::pipeline
