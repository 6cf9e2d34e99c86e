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

#include "pcgkit/features/fft.hpp"

#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace pcg::features {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("fft: length must be positive");
  using std::numbers::pi;
  if (is_pow2(n)) {
    bitrev_.resize(n);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      bitrev_[i] = r;
    }
    twiddle_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k)
      twiddle_[k] = std::polar(1.0, -2.0 * pi * double(k) / double(n));
    return;
  }
  // Bluestein: X[k] = w[k] * sum_j (x[j] w[j]) conj(w[k - j]),
  // w[j] = exp(-i pi j^2 / n).
  const std::size_t m = next_pow2(2 * n - 1);
  inner_ = std::make_unique<Fft>(m);
  chirp_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    // j^2 mod 2n keeps the phase argument small.
    const std::size_t sq = (j * j) % (2 * n);
    chirp_[j] = std::polar(1.0, -pi * double(sq) / double(n));
  }
  chirp_kernel_hat_.assign(m, cplx{});
  chirp_kernel_hat_[0] = std::conj(chirp_[0]);
  for (std::size_t j = 1; j < n; ++j) {
    chirp_kernel_hat_[j] = std::conj(chirp_[j]);
    chirp_kernel_hat_[m - j] = std::conj(chirp_[j]);
  }
  inner_->forward(chirp_kernel_hat_);
}

Fft::~Fft() = default;

void Fft::forward(std::span<cplx> a) const {
  if (a.size() != n_) throw std::invalid_argument("fft: length mismatch");
  if (inner_) bluestein(a, false);
  else radix2(a, false);
}

void Fft::inverse(std::span<cplx> a) const {
  if (a.size() != n_) throw std::invalid_argument("fft: length mismatch");
  if (inner_) bluestein(a, true);
  else radix2(a, true);
  const double scale = 1.0 / double(n_);
  for (auto& v : a) v *= scale;
}

void Fft::radix2(std::span<cplx> a, bool inverse) const {
  const std::size_t n = n_;
  for (std::size_t i = 0; i < n; ++i)
    if (i < bitrev_[i]) std::swap(a[i], a[bitrev_[i]]);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        cplx w = twiddle_[k * step];
        if (inverse) w = std::conj(w);
        const cplx u = a[start + k];
        const cplx v = a[start + k + half] * w;
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
}

void Fft::bluestein(std::span<cplx> a, bool inverse) const {
  // The inverse DFT is conj(DFT(conj(x))).
  const std::size_t m = inner_->size();
  std::vector<cplx> buf(m, cplx{});
  for (std::size_t j = 0; j < n_; ++j)
    buf[j] = (inverse ? std::conj(a[j]) : a[j]) * chirp_[j];
  inner_->forward(buf);
  for (std::size_t k = 0; k < m; ++k) buf[k] *= chirp_kernel_hat_[k];
  inner_->inverse(buf);
  for (std::size_t k = 0; k < n_; ++k) {
    const cplx v = buf[k] * chirp_[k];
    a[k] = inverse ? std::conj(v) : v;
  }
}

const Fft& fft_plan(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<Fft>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fft>(n);
  return *slot;
}

std::vector<cplx> fft_real(std::span<const double> x) {
  std::vector<cplx> a(x.begin(), x.end());
  fft_plan(a.size()).forward(a);
  return a;
}

}  // namespace pcg::features
