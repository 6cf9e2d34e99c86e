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

#include "pcgkit/preprocess/butterworth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pcg::preprocess {

std::vector<double> SosFilter::apply(std::span<const double> x) const {
  std::vector<double> y(x.begin(), x.end());
  for (const Biquad& s : sections_) {
    double z1 = 0.0, z2 = 0.0;  // transposed direct form II state
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

std::complex<double> SosFilter::response(double freq_hz, double fs_hz) const {
  const std::complex<double> zinv =
      std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / fs_hz);
  std::complex<double> h = 1.0;
  for (const Biquad& s : sections_) {
    h *= (s.b0 + s.b1 * zinv + s.b2 * zinv * zinv) /
         (1.0 + s.a1 * zinv + s.a2 * zinv * zinv);
  }
  return h;
}

SosFilter design_butterworth_lowpass(int order, double cutoff_hz, double fs_hz) {
  if (order < 1) throw std::invalid_argument("butterworth: order must be >= 1");
  if (!(fs_hz > 0.0) || !(cutoff_hz > 0.0) || cutoff_hz >= fs_hz / 2.0)
    throw std::invalid_argument("butterworth: cutoff " + std::to_string(cutoff_hz) +
                                " Hz must lie in (0, fs/2) for fs " +
                                std::to_string(fs_hz) + " Hz");
  using std::numbers::pi;
  const double k = 2.0 * fs_hz;
  const double warped = k * std::tan(pi * cutoff_hz / fs_hz);

  std::vector<Biquad> sections;
  // Upper-half-plane poles of the prototype pair with their conjugates.
  for (int i = 0; i < order / 2; ++i) {
    const double theta = pi * (2.0 * i + order + 1) / (2.0 * order);
    const std::complex<double> p = warped * std::polar(1.0, theta);
    const std::complex<double> z = (k + p) / (k - p);
    Biquad s;
    s.a1 = -2.0 * z.real();
    s.a2 = std::norm(z);
    const double g = (1.0 + s.a1 + s.a2) / 4.0;
    s.b0 = g;
    s.b1 = 2.0 * g;
    s.b2 = g;
    sections.push_back(s);
  }
  if (order % 2 == 1) {
    const double z = (k - warped) / (k + warped);
    Biquad s;
    s.a1 = -z;
    const double g = (1.0 - z) / 2.0;
    s.b0 = g;
    s.b1 = g;
    sections.push_back(s);
  }
  return SosFilter(std::move(sections));
}

double butterworth_digital_magnitude(int order, double cutoff_hz, double fs_hz,
                                     double freq_hz) {
  using std::numbers::pi;
  const double ratio = std::tan(pi * freq_hz / fs_hz) / std::tan(pi * cutoff_hz / fs_hz);
  return 1.0 / std::sqrt(1.0 + std::pow(ratio, 2.0 * order));
}

std::vector<double> butterworth_lowpass(std::span<const double> x, double fs_hz,
                                        int order, double cutoff_hz) {
  for (double v : x)
    if (!std::isfinite(v))
      throw std::invalid_argument("butterworth: non-finite input sample");
  return design_butterworth_lowpass(order, cutoff_hz, fs_hz).apply(x);
}

}  // namespace pcg::preprocess
