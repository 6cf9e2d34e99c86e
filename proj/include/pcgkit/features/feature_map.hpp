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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pcgkit/features/matrix.hpp"

namespace pcg::features {

enum class FeatureKind : std::uint8_t { STFT = 1, MFCC = 2, WST = 3 };

std::string_view to_string(FeatureKind kind);
std::optional<FeatureKind> parse_feature_kind(std::string_view s);

// Defaults: nFFT 128, hop 16, 10 MFCCs, Q = 2, J = 4, n_mels = 26,
// alpha = 0.97.
struct FeatureParams {
  int sample_rate_hz = 4000;
  int nfft = 128;
  int hop = 16;
  int n_mfcc = 10;
  int n_mels = 26;
  double pre_emphasis_alpha = 0.97;
  int wst_J = 4;
  int wst_Q = 2;
  int wst_order = 2;
  // Applied to scattering output before it is stored or fed to a model.
  bool log_scattering = true;
  double log_floor = 1e-10;

  // Canonical "key=value;..." text; its FNV-1a hash tags cached files.
  std::string canonical(FeatureKind kind) const;
  std::uint64_t hash(FeatureKind kind) const;
};

struct FeatureMap {
  FeatureKind kind = FeatureKind::STFT;
  Matrix data;  // rows: bins / coefficients / paths; cols: frames
  FeatureParams params;
};

class FeatureFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary tensor file, little-endian:
//   char[4] "PCGF", u32 version (1), u8 kind, u32 rows, u32 cols,
//   u64 params hash, then rows*cols float32 in row-major order.
void save_feature_map(const std::filesystem::path& path, const FeatureMap& map);

struct LoadedFeatures {
  FeatureKind kind;
  std::uint64_t params_hash;
  Matrix data;
};
LoadedFeatures load_feature_map(const std::filesystem::path& path);

// Convenience dispatch to stft / mfcc / wst (+ log when enabled).
FeatureMap extract(FeatureKind kind, std::span<const double> x,
                   const FeatureParams& params);

}  // namespace pcg::features
