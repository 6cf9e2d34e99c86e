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

#include "pcgkit/features/stft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "pcgkit/features/fft.hpp"

namespace pcg::features {

std::vector<double> hamming_window(int n) {
  if (n < 2) throw std::invalid_argument("hamming_window: n must be >= 2");
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    w[k] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * k / (n - 1));
  return w;
}

std::size_t frame_count(std::size_t len, int nfft, int hop) {
  if (nfft < 2 || hop < 1) throw std::invalid_argument("framing: need nfft >= 2, hop >= 1");
  if (len < static_cast<std::size_t>(nfft))
    throw std::invalid_argument("framing: input of " + std::to_string(len) +
                                " samples is shorter than one frame (" +
                                std::to_string(nfft) + ")");
  return 1 + (len - nfft) / hop;
}

FeatureMap stft(std::span<const double> x, const FeatureParams& params) {
  const std::size_t frames = frame_count(x.size(), params.nfft, params.hop);
  const std::size_t n = static_cast<std::size_t>(params.nfft);
  const std::size_t bins = n / 2 + 1;
  const auto window = hamming_window(params.nfft);
  const Fft& plan = fft_plan(n);

  FeatureMap out{FeatureKind::STFT, Matrix(bins, frames), params};
  std::vector<cplx> buf(n);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t start = f * params.hop;
    for (std::size_t k = 0; k < n; ++k) buf[k] = x[start + k] * window[k];
    plan.forward(buf);
    for (std::size_t b = 0; b < bins; ++b) out.data(b, f) = std::abs(buf[b]);
  }
  return out;
}

}  // namespace pcg::features
