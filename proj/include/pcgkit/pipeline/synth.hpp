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
#include <map>

#include "pcgkit/common/labels.hpp"

namespace pcg::pipeline {

// Separable stand-in for the murmur data, written in the 2022 layout
// (<patient>.txt + <patient>_<LOC>.wav) so every pipeline stage runs on it.
//   Absent:  one or two steady tones
//   Present: an amplitude-modulated tone (3-8 Hz envelope)
//   Unknown: gated white-noise bursts
// Every recording also carries a little white noise.
struct SynthOptions {
  int patients = 150;
  int seconds = 16;
  int sample_rate_hz = 4000;
  double noise = 0.05;
  std::uint64_t seed = 7;
};

struct SynthSummary {
  std::map<ClassLabel, int> patients;
  int recordings = 0;
};

SynthSummary generate_synthetic(const std::filesystem::path& root, const SynthOptions& opt = {});

}  // namespace pcg::pipeline
