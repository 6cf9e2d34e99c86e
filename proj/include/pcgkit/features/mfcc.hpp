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

#include <span>
#include <vector>

#include "pcgkit/features/feature_map.hpp"
#include "pcgkit/features/matrix.hpp"

namespace pcg::features {

// y[n] = x[n] - alpha x[n-1], y[0] = x[0]. Requires 0 <= alpha < 1.
std::vector<double> pre_emphasis(std::span<const double> x, double alpha);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// n_mels x (nfft/2 + 1) triangular filters. Edge frequencies are spaced
// evenly on the mel scale over [0, fs/2] and snapped to FFT bins with
// floor((nfft + 1) f / fs); filter m rises from edge m to a unit peak at
// edge m+1 and falls to zero at edge m+2. Throws when two edges land on
// the same bin.
Matrix mel_filterbank(int n_mels, int nfft, int sample_rate_hz);

// Bin index of each filter's peak (length n_mels).
std::vector<std::size_t> mel_center_bins(int n_mels, int nfft, int sample_rate_hz);

// Orthonormal DCT-II, n_out x n_in:
// C[k][m] = s_k cos(pi k (m + 1/2) / n_in), s_0 = sqrt(1/n_in), s_k = sqrt(2/n_in).
Matrix dct2_matrix(int n_out, int n_in);

// pre-emphasis -> frames -> Hamming -> |FFT|^2 -> mel -> log(max(E, floor))
// -> DCT-II, first n_mfcc coefficients. Output is n_mfcc x frames.
FeatureMap mfcc(std::span<const double> x, const FeatureParams& params);

}  // namespace pcg::features
