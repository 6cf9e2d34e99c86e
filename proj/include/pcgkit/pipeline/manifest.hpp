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
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pcgkit/common/labels.hpp"
#include "pcgkit/preprocess/segment_store.hpp"

namespace pcg::pipeline {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Noise-only segments may move from Present or Absent to Unknown; nothing
// else may change. Identity is always allowed.
bool relabel_allowed(ClassLabel from, ClassLabel to);
// Human-readable statement of the rule, used in error messages and 409s.
std::string_view relabel_rule_text();

enum class Split { None, Train, Val, Test };
std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

struct ManifestEntry {
  std::string segment_id;
  std::string recording_id;
  std::string patient_id;
  Location location = Location::Single;
  int index = 0;
  ClassLabel label = ClassLabel::Absent;      // inherited from the recording
  ClassLabel effective = ClassLabel::Absent;  // after relabeling
  Split split = Split::None;

  // Voting group: "<patient>/<location>".
  std::string group() const;
};

struct DatasetManifest {
  Task task = Task::Murmur2022;
  int window_seconds = 0;
  std::vector<ManifestEntry> entries;

  std::size_t relabeled() const;
  // "PCG2022" or "PCG2016".
  std::string_view dataset_tag() const;
};

struct RelabelEntry {
  std::string segment_id;
  ClassLabel from = ClassLabel::Absent;
  ClassLabel to = ClassLabel::Unknown;
};

// One {"segment_id","from","to"} object per line. Lines violating the
// transition rule are a hard error naming the line.
std::vector<RelabelEntry> read_relabel_file(const std::filesystem::path& path);
std::string relabel_line(const RelabelEntry& e);

// Every entry must name a known segment whose original label equals
// `from`. Repeating a segment is allowed only with the same target.
void apply_relabels(DatasetManifest& m, const std::vector<RelabelEntry>& relabels);

// Segment inventory of a store, labels inherited from the recordings, then
// overridden by the relabel file when given.
DatasetManifest build_manifest(const preprocess::SegmentStore& store,
                               const std::optional<std::filesystem::path>& relabel_file = {});

nlohmann::json to_json(const ManifestEntry& e, Task task);
ManifestEntry manifest_entry_from_json(const nlohmann::json& j);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest load_manifest(const std::filesystem::path& path);

// Throws ManifestError if any effective label breaks the transition rule
// or a patient spans more than one split.
void check_invariants(const DatasetManifest& m);

// Counts of effective labels, in `classes` order.
std::vector<std::size_t> class_counts(const DatasetManifest& m, const std::vector<ClassLabel>& classes,
                                      std::optional<Split> split = std::nullopt);

}  // namespace pcg::pipeline
