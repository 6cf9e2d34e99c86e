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
#include <stdexcept>
#include <string>
#include <vector>

#include "pcgkit/common/labels.hpp"
#include "pcgkit/preprocess/recording.hpp"

namespace pcg::preprocess {

struct Segment {
  std::string recording_id;
  std::string patient_id;
  Location location = Location::Single;
  int index = 0;
  int sample_rate_hz = 0;
  int window_seconds = 0;
  ClassLabel label = ClassLabel::Absent;
  std::vector<double> samples;  // exactly window_seconds * sample_rate_hz

  // "<recording_id>_s<index>"
  std::string id() const;
};

// Raised for segments whose population standard deviation is <= 1e-12.
// These go to the noise-only review queue instead of the training set.
class FlatSegmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SegmentationStats {
  std::size_t too_short = 0;  // recordings shorter than one window
};

// Cuts floor(duration / N) contiguous, non-overlapping windows starting at
// sample 0. The tail shorter than N seconds is dropped.
std::vector<Segment> segment_recording(const PcgRecording& rec, int window_seconds,
                                       SegmentationStats* stats = nullptr);

inline constexpr double kMinSegmentStddev = 1e-12;

// (x - mean) / sigma with the population (1/n) standard deviation.
Segment zscore_normalize(Segment seg);
std::vector<double> zscore(const std::vector<double>& x);

}  // namespace pcg::preprocess
