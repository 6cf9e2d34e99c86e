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

#include <complex>
#include <span>
#include <vector>

namespace pcg::preprocess {

// Normalized second-order section, a0 == 1. First-order sections use
// b2 == a2 == 0.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

class SosFilter {
 public:
  explicit SosFilter(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

  // Causal, zero initial state. Output has the input's length.
  std::vector<double> apply(std::span<const double> x) const;

  std::complex<double> response(double freq_hz, double fs_hz) const;
  const std::vector<Biquad>& sections() const { return sections_; }

 private:
  std::vector<Biquad> sections_;
};

// Digital Butterworth low-pass via the bilinear transform with the cutoff
// pre-warped, so |H(fc)|^2 = 1/2 exactly. Each section has unit DC gain.
// Throws std::invalid_argument unless 0 < cutoff < fs/2 and order >= 1.
SosFilter design_butterworth_lowpass(int order, double cutoff_hz, double fs_hz);

// Magnitude of the filter designed above, in closed form:
// 1 / sqrt(1 + (tan(pi f / fs) / tan(pi fc / fs))^(2 order)).
double butterworth_digital_magnitude(int order, double cutoff_hz, double fs_hz,
                                     double freq_hz);

// Throws std::invalid_argument on non-finite samples.
std::vector<double> butterworth_lowpass(std::span<const double> x, double fs_hz,
                                        int order = 5, double cutoff_hz = 500.0);

}  // namespace pcg::preprocess
