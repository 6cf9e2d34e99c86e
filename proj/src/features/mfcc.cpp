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

#include "pcgkit/features/mfcc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "pcgkit/features/fft.hpp"
#include "pcgkit/features/stft.hpp"

namespace pcg::features {

std::vector<double> pre_emphasis(std::span<const double> x, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("pre_emphasis: alpha must be in [0, 1)");
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  for (std::size_t n = 1; n < x.size(); ++n) y[n] = x[n] - alpha * x[n - 1];
  return y;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<std::size_t> edge_bins(int n_mels, int nfft, int fs) {
  if (n_mels < 2) throw std::invalid_argument("mel_filterbank: n_mels must be >= 2");
  if (nfft < 2 || fs <= 0) throw std::invalid_argument("mel_filterbank: bad nfft/fs");
  const double top = hz_to_mel(fs / 2.0);
  std::vector<std::size_t> bins(static_cast<std::size_t>(n_mels) + 2);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const double hz = mel_to_hz(top * double(i) / double(n_mels + 1));
    bins[i] = static_cast<std::size_t>(std::floor((nfft + 1) * hz / fs));
  }
  bins.back() = std::min<std::size_t>(bins.back(), static_cast<std::size_t>(nfft / 2));
  for (std::size_t i = 1; i < bins.size(); ++i)
    if (bins[i] <= bins[i - 1])
      throw std::invalid_argument(
          "mel_filterbank: " + std::to_string(n_mels) + " filters are too many for nfft " +
          std::to_string(nfft) + " at " + std::to_string(fs) +
          " Hz (adjacent centers share bin " + std::to_string(bins[i]) + ")");
  return bins;
}

}  // namespace

std::vector<std::size_t> mel_center_bins(int n_mels, int nfft, int sample_rate_hz) {
  auto e = edge_bins(n_mels, nfft, sample_rate_hz);
  return {e.begin() + 1, e.end() - 1};
}

Matrix mel_filterbank(int n_mels, int nfft, int sample_rate_hz) {
  const auto e = edge_bins(n_mels, nfft, sample_rate_hz);
  Matrix h(static_cast<std::size_t>(n_mels), static_cast<std::size_t>(nfft / 2 + 1));
  for (std::size_t m = 0; m < h.rows; ++m) {
    const std::size_t lo = e[m], mid = e[m + 1], hi = e[m + 2];
    for (std::size_t k = lo; k <= mid; ++k)
      h(m, k) = double(k - lo) / double(mid - lo);
    for (std::size_t k = mid; k <= hi; ++k)
      h(m, k) = double(hi - k) / double(hi - mid);
  }
  return h;
}

Matrix dct2_matrix(int n_out, int n_in) {
  Matrix c(static_cast<std::size_t>(n_out), static_cast<std::size_t>(n_in));
  for (int k = 0; k < n_out; ++k) {
    const double s = std::sqrt((k == 0 ? 1.0 : 2.0) / n_in);
    for (int m = 0; m < n_in; ++m)
      c(k, m) = s * std::cos(std::numbers::pi * k * (m + 0.5) / n_in);
  }
  return c;
}

FeatureMap mfcc(std::span<const double> x, const FeatureParams& params) {
  if (params.n_mfcc < 1 || params.n_mfcc > params.n_mels)
    throw std::invalid_argument("mfcc: n_mfcc must be in [1, n_mels]");
  const std::size_t frames = frame_count(x.size(), params.nfft, params.hop);
  const std::size_t n = static_cast<std::size_t>(params.nfft);
  const auto emphasized = pre_emphasis(x, params.pre_emphasis_alpha);
  const auto window = hamming_window(params.nfft);
  const Matrix mel = mel_filterbank(params.n_mels, params.nfft, params.sample_rate_hz);
  const Matrix dct = dct2_matrix(params.n_mfcc, params.n_mels);
  const Fft& plan = fft_plan(n);

  FeatureMap out{FeatureKind::MFCC, Matrix(dct.rows, frames), params};
  std::vector<cplx> buf(n);
  std::vector<double> power(mel.cols), logmel(mel.rows);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t start = f * params.hop;
    for (std::size_t k = 0; k < n; ++k) buf[k] = emphasized[start + k] * window[k];
    plan.forward(buf);
    for (std::size_t b = 0; b < power.size(); ++b) power[b] = std::norm(buf[b]);
    for (std::size_t m = 0; m < mel.rows; ++m) {
      double e = 0.0;
      for (std::size_t b = 0; b < power.size(); ++b) e += mel(m, b) * power[b];
      logmel[m] = std::log(std::max(e, params.log_floor));
    }
    for (std::size_t c = 0; c < dct.rows; ++c) {
      double acc = 0.0;
      for (std::size_t m = 0; m < mel.rows; ++m) acc += dct(c, m) * logmel[m];
      out.data(c, f) = acc;
    }
  }
  return out;
}

}  // namespace pcg::features
