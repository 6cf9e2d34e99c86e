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

namespace pcg::features {

// Symmetric Hamming window, w[k] = 0.54 - 0.46 cos(2 pi k / (n - 1)).
std::vector<double> hamming_window(int n);

// 1 + floor((len - nfft) / hop); throws if len < nfft.
std::size_t frame_count(std::size_t len, int nfft, int hop);

// One-sided magnitude STFT with a Hamming window, no padding. Output is
// (nfft/2 + 1) x frame_count.
FeatureMap stft(std::span<const double> x, const FeatureParams& params);

}  // namespace pcg::features
