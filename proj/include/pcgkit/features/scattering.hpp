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
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcgkit/features/feature_map.hpp"
#include "pcgkit/features/matrix.hpp"

namespace pcg::features {

enum class Boundary {
  Reflect,   // mirror-extend to a power-of-two length before filtering
  Periodic,  // treat the input as one period; no extension
};

// 1D Morlet scattering filters, sampled in the Fourier domain on the padded
// length. Frequencies are in cycles per sample; all transfer functions are
// real (zero-phase Gaussian envelopes).
struct MorletFilterBank {
  struct Wavelet {
    double xi = 0.0;     // center frequency
    double sigma = 0.0;  // Gaussian bandwidth
    std::vector<double> hat;
  };

  int J = 0;
  int Q = 0;
  Boundary boundary = Boundary::Reflect;
  std::size_t signal_len = 0;
  std::size_t padded_len = 0;
  std::size_t pad_left = 0;
  double sigma_low = 0.0;
  std::vector<double> phi_hat;  // low-pass, phi_hat[0] == 1
  std::vector<Wavelet> psi1;    // Q per octave, descending xi
  std::vector<Wavelet> psi2;    // 1 per octave, descending xi
  // (n1, n2) index pairs kept for second order: xi2 below the full width at
  // half maximum of psi1[n1].
  std::vector<std::pair<int, int>> pairs;
};

// Throws std::invalid_argument when 2^J > len, J < 1 or Q < 1. Periodic
// banks are built on len itself; it exists so the frame bound can be
// checked without boundary extension effects.
MorletFilterBank morlet_filterbank(int J, int Q, std::size_t len,
                                   Boundary boundary = Boundary::Reflect);

// Shared, immutable bank for repeated transforms of the same length.
std::shared_ptr<const MorletFilterBank> cached_filterbank(int J, int Q, std::size_t len);

// Row layout: [S0] [S1 for each psi1] [S2 for each pair], truncated by
// order (0, 1 or 2). Columns: len / 2^J, sampled at t = k 2^J.
Matrix scatter(std::span<const double> x, const MorletFilterBank& bank, int order);

std::size_t scattering_rows(const MorletFilterBank& bank, int order);

// Human readable path labels ("S0", "S1[3]", "S2[0,2]") in row order.
std::vector<std::string> scattering_path_names(const MorletFilterBank& bank, int order);

// Raw (unlogged) scattering map for params.wst_J / wst_Q / wst_order.
FeatureMap wst(std::span<const double> x, const FeatureParams& params);

// v <- log(max(|v|, floor)) elementwise.
void log_scale(Matrix& m, double floor);

}  // namespace pcg::features
