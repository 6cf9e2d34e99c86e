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

#include "pcgkit/pipeline/synth.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "pcgkit/common/io.hpp"
#include "pcgkit/nn/tensor.hpp"
#include "pcgkit/pipeline/sampling.hpp"
#include "pcgkit/preprocess/wav.hpp"

namespace pcg::pipeline {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> render(ClassLabel label, std::size_t n, double fs, double noise, nn::Rng& rng) {
  std::vector<double> x(n, 0.0);
  switch (label) {
    case ClassLabel::Absent: {
      const int tones = 1 + int(rng.below(2));
      for (int k = 0; k < tones; ++k) {
        const double f = rng.uniform(60.0, 300.0), ph = rng.uniform(0.0, kTwoPi);
        for (std::size_t i = 0; i < n; ++i) x[i] += 0.4 / tones * std::sin(kTwoPi * f * double(i) / fs + ph);
      }
      break;
    }
    case ClassLabel::Present: {
      const double fc = rng.uniform(60.0, 300.0), fm = rng.uniform(3.0, 8.0);
      const double pc = rng.uniform(0.0, kTwoPi), pm = rng.uniform(0.0, kTwoPi);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = double(i) / fs;
        x[i] = 0.2 * (1.0 + 0.9 * std::sin(kTwoPi * fm * t + pm)) * std::sin(kTwoPi * fc * t + pc);
      }
      break;
    }
    case ClassLabel::Unknown: {
      std::size_t i = std::size_t(rng.uniform(0.0, 0.3) * fs);
      while (i < n) {
        const std::size_t len = std::size_t(rng.uniform(0.05, 0.3) * fs);
        const double amp = rng.uniform(0.15, 0.35);
        for (std::size_t k = i; k < std::min(n, i + len); ++k) x[k] += amp * rng.normal();
        i += len + std::size_t(rng.uniform(0.1, 0.6) * fs);
      }
      break;
    }
    default:
      throw std::invalid_argument("synthetic data only covers the murmur classes");
  }
  for (double& v : x) v = std::clamp(v + noise * rng.normal(), -0.99, 0.99);
  return x;
}

}  // namespace

SynthSummary generate_synthetic(const std::filesystem::path& root, const SynthOptions& opt) {
  if (opt.patients < 3) throw std::invalid_argument("synthetic dataset needs at least 3 patients");
  if (opt.seconds < 1 || opt.sample_rate_hz < 1000)
    throw std::invalid_argument("synthetic recordings need >= 1 s at >= 1 kHz");
  std::filesystem::create_directories(root);
  const ClassLabel cycle[3] = {ClassLabel::Present, ClassLabel::Unknown, ClassLabel::Absent};
  const char* locations[4] = {"AV", "PV", "TV", "MV"};
  std::vector<ClassLabel> labels;
  for (int p = 0; p < opt.patients; ++p) labels.push_back(cycle[p % 3]);
  nn::Rng rng(opt.seed);
  shuffle(labels, rng);

  SynthSummary s;
  const std::size_t n = std::size_t(opt.seconds) * std::size_t(opt.sample_rate_hz);
  for (int p = 0; p < opt.patients; ++p) {
    const std::string pid = std::to_string(90000 + p);
    const std::string loc = locations[p % 4];
    const std::string rec = pid + "_" + loc;
    preprocess::write_wav16(root / (rec + ".wav"),
                            render(labels[std::size_t(p)], n, opt.sample_rate_hz, opt.noise, rng),
                            opt.sample_rate_hz);
    std::ostringstream txt;
    txt << pid << " 1 " << opt.sample_rate_hz << "\n"
        << loc << " " << rec << ".hea " << rec << ".wav " << rec << ".tsv\n"
        << "#Age: Child\n"
        << "#Murmur: " << to_string(labels[std::size_t(p)]) << "\n";
    write_file_atomic(root / (pid + ".txt"), txt.str());
    ++s.patients[labels[std::size_t(p)]];
    ++s.recordings;
  }
  return s;
}

}  // namespace pcg::pipeline
