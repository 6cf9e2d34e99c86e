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

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcgkit/common/labels.hpp"

namespace pcg::preprocess {

class MetadataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PcgRecording {
  std::string recording_id;  // WAV file stem, e.g. "50001_AV" or "a0001"
  std::string patient_id;
  Location location = Location::Single;
  Task task = Task::Murmur2022;
  ClassLabel label = ClassLabel::Absent;
  int sample_rate_hz = 0;
  std::vector<double> samples;
  // Set when the rate is neither 2000 nor 4000 Hz. Such files are still
  // processed at their native rate.
  bool unusual_rate = false;

  double duration_seconds() const {
    return sample_rate_hz > 0 ? double(samples.size()) / sample_rate_hz : 0.0;
  }
};

// One row of dataset metadata describing a WAV file.
struct RecordingMeta {
  std::filesystem::path wav_path;
  std::string recording_id;
  std::string patient_id;
  Location location = Location::Single;
  Task task = Task::Murmur2022;
  ClassLabel label = ClassLabel::Absent;
  std::optional<int> expected_rate_hz;
};

// Reads the WAV header for the sample rate and validates it against the
// metadata. Throws WavError for unreadable audio and MetadataError for a
// rate mismatch or an inconsistent label/location/task combination.
PcgRecording load_recording(const std::filesystem::path& path,
                            const RecordingMeta& meta);
inline PcgRecording load_recording(const RecordingMeta& meta) {
  return load_recording(meta.wav_path, meta);
}

// CirCor 2022 layout: a flat directory of <patient>.txt files, each
// listing its recordings and a "#Murmur:" line. Every recording inherits
// the patient-level murmur label.
std::vector<RecordingMeta> scan_physionet2022(const std::filesystem::path& root);

// 2016 layout: REFERENCE.csv ("name,-1|1") plus name.wav, either in root or
// in its immediate subdirectories (training-a ... training-f).
std::vector<RecordingMeta> scan_physionet2016(const std::filesystem::path& root);

// Detects the layout; throws MetadataError if neither matches.
std::vector<RecordingMeta> scan_dataset(const std::filesystem::path& root,
                                        std::optional<Task> task = std::nullopt);
std::optional<Task> detect_layout(const std::filesystem::path& root);

}  // namespace pcg::preprocess
