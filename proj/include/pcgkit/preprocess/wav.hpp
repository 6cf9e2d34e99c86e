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

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace pcg::preprocess {

class WavError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WavAudio {
  int sample_rate_hz = 0;
  int bits_per_sample = 0;
  // Mono samples in [-1, 1]. Multi-channel files are averaged down.
  std::vector<double> samples;
};

// Accepts PCM 8-bit (unsigned), 16/24/32-bit signed integer and 32-bit
// IEEE float, including WAVE_FORMAT_EXTENSIBLE wrappers.
WavAudio decode_wav(std::span<const std::uint8_t> bytes);
WavAudio read_wav(const std::filesystem::path& path);

// 16-bit mono PCM, the inverse of the 16-bit decode scale (x * 32768,
// saturating at 32767).
std::vector<std::uint8_t> encode_wav16(std::span<const double> samples,
                                       int sample_rate_hz);
void write_wav16(const std::filesystem::path& path,
                 std::span<const double> samples, int sample_rate_hz);

}  // namespace pcg::preprocess
