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
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace pcg::features {

using cplx = std::complex<double>;

// Complex DFT of a fixed length. Powers of two use an iterative radix-2
// kernel; other lengths go through Bluestein's chirp-z on a power-of-two
// plan. Plans are immutable after construction and safe to share.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t size() const { return n_; }

  // X[k] = sum_n x[n] exp(-2 pi i k n / N), in place.
  void forward(std::span<cplx> a) const;
  // Inverse including the 1/N factor, in place.
  void inverse(std::span<cplx> a) const;

 private:
  void radix2(std::span<cplx> a, bool inverse) const;
  void bluestein(std::span<cplx> a, bool inverse) const;

  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<cplx> twiddle_;  // exp(-2 pi i k / n), k < n/2
  // Bluestein state.
  std::vector<cplx> chirp_;
  std::vector<cplx> chirp_kernel_hat_;
  std::unique_ptr<Fft> inner_;
};

// Process-wide cache of plans keyed by length.
const Fft& fft_plan(std::size_t n);

bool is_pow2(std::size_t n);
std::size_t next_pow2(std::size_t n);

// Complex spectrum of a real sequence (full length).
std::vector<cplx> fft_real(std::span<const double> x);

}  // namespace pcg::features
