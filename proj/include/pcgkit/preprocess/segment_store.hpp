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
#include <functional>
#include <string>
#include <vector>

#include "pcgkit/common/labels.hpp"
#include "pcgkit/preprocess/segment.hpp"

namespace pcg::preprocess {

// Metadata for one stored segment (one line of index.jsonl).
struct SegmentRecord {
  std::string segment_id;
  std::string recording_id;
  std::string patient_id;
  Location location = Location::Single;
  int index = 0;
  int sample_rate_hz = 0;
  int window_seconds = 0;
  ClassLabel label = ClassLabel::Absent;
  std::size_t num_samples = 0;
};

struct RejectedSegment {
  std::string segment_id;
  std::string recording_id;
  ClassLabel label = ClassLabel::Absent;
  std::string reason;
};

struct PreprocessOptions {
  int window_seconds = 4;
  int filter_order = 5;
  double cutoff_hz = 500.0;
  unsigned workers = 0;  // 0: hardware concurrency
};

struct StoreSummary {
  Task task = Task::Murmur2022;
  int window_seconds = 0;
  std::size_t recordings = 0;
  std::size_t segments = 0;
  std::size_t rejected = 0;
  std::size_t too_short = 0;
  std::size_t unusual_rate = 0;
};

// On-disk layout:
//   <dir>/store.json           task, window, filter settings, counts
//   <dir>/index.jsonl          one SegmentRecord per line, stable order
//   <dir>/rejected.jsonl       flat segments (noise-only review queue)
//   <dir>/segments/<id>.f32    little-endian float32 normalized samples
class SegmentStore {
 public:
  explicit SegmentStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  Task task() const { return task_; }
  int window_seconds() const { return window_seconds_; }
  const std::vector<SegmentRecord>& records() const { return records_; }
  const std::vector<RejectedSegment>& rejected() const { return rejected_; }

  // Index of segment_id in records(), or -1.
  std::ptrdiff_t find(const std::string& segment_id) const;
  std::vector<double> load_samples(const std::string& segment_id) const;

 private:
  std::filesystem::path dir_;
  Task task_ = Task::Murmur2022;
  int window_seconds_ = 0;
  std::vector<SegmentRecord> records_;
  std::vector<RejectedSegment> rejected_;
};

// Filters each recording, cuts it into windows, z-scores every window and
// writes the store. Recordings are processed in parallel; output order is
// the scan order regardless of scheduling.
StoreSummary build_segment_store(const std::filesystem::path& dataset_root,
                                 const std::filesystem::path& out_dir,
                                 const PreprocessOptions& options);

void write_f32(const std::filesystem::path& path, const std::vector<double>& x);
std::vector<double> read_f32(const std::filesystem::path& path);

}  // namespace pcg::preprocess
