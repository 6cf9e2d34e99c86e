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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pcgkit/features/feature_map.hpp"

namespace pcg::annotator {

// 8-bit RGB, rows top to bottom, no interlacing. Every scanline uses
// filter type 0.
std::vector<std::uint8_t> encode_png_rgb(std::size_t width, std::size_t height,
                                         std::span<const std::uint8_t> rgb);

// Fixed five-stop colormap (dark blue to yellow); t is clamped to [0, 1].
std::array<std::uint8_t, 3> colormap(double t);

struct RenderedImage {
  std::size_t width = 0;   // feature cols * scale
  std::size_t height = 0;  // feature rows * scale
  std::vector<std::uint8_t> png;
};

// Each coefficient becomes a scale x scale block, row 0 at the bottom.
// Values are min/max normalized; a constant map renders as one color.
RenderedImage render_matrix(const features::Matrix& m, int scale);

// STFT magnitudes are shown as log10(max(v, 1e-10)); scattering maps use
// the log scattering output. Throws std::invalid_argument for MFCC.
RenderedImage render_segment(features::FeatureKind kind, std::span<const double> samples,
                             int sample_rate_hz, int scale);

}  // namespace pcg::annotator
