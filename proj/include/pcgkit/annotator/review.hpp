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
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pcgkit/common/labels.hpp"
#include "pcgkit/preprocess/segment_store.hpp"

namespace pcg::annotator {

enum class ReviewStatus { Unreviewed, Confirmed, Relabeled };
std::string_view to_string(ReviewStatus s);
std::optional<ReviewStatus> parse_status(std::string_view s);

struct ReviewItem {
  std::string segment_id;
  std::string recording_id;
  std::string patient_id;
  Location location = Location::Single;
  int index = 0;
  ClassLabel original = ClassLabel::Absent;
  ClassLabel effective = ClassLabel::Absent;
  ReviewStatus status = ReviewStatus::Unreviewed;
  std::string note;

  bool operator==(const ReviewItem&) const = default;
};
nlohmann::json to_json(const ReviewItem& item);

// One audit line. `from` is always the original label and `to` the
// effective label after the decision, so every line obeys the relabel
// rule on its own.
struct AuditEntry {
  std::uint64_t seq = 0;
  std::string timestamp;  // UTC, ISO 8601
  std::string segment_id;
  ClassLabel from = ClassLabel::Absent;
  ClassLabel to = ClassLabel::Absent;
  std::string note;
};
nlohmann::json to_json(const AuditEntry& e);
AuditEntry audit_entry_from_json(const nlohmann::json& j);

using Snapshot = std::shared_ptr<const std::vector<ReviewItem>>;

struct Page {
  std::vector<ReviewItem> items;
  std::size_t total = 0;  // items matching the filter
  std::size_t page = 1;
  std::size_t page_size = 50;
};

enum class Outcome { Ok, NotFound, Illegal };

struct Decision {
  Outcome outcome = Outcome::Ok;
  std::optional<ReviewItem> item;
  std::string message;
};

// Review state of one segment store. Items are ordered by (recording id,
// index). State lives in <review_dir>/audit.jsonl (append-only) and is
// mirrored to <review_dir>/manifest.jsonl after every decision.
class ReviewStore {
 public:
  // Loads the store index and replays an existing audit log.
  ReviewStore(const std::filesystem::path& store_dir, std::filesystem::path review_dir);

  // Immutable view of the current state; safe to hold while others write.
  Snapshot snapshot() const;

  Page list(std::optional<ReviewStatus> status, std::size_t page, std::size_t page_size) const;
  std::optional<ReviewItem> find(const std::string& segment_id) const;

  // `to` is "confirm" or a label name. Naming the original label is a
  // confirmation; Unknown from Present or Absent is a relabel; anything
  // else is Illegal and leaves the state untouched. Decisions are
  // serialized: audit append, manifest rewrite, snapshot swap.
  Decision decide(const std::string& segment_id, std::string_view to, const std::string& note = {});

  // {"segment_id","from","to"} lines for every item whose effective label
  // differs from its original, in item order.
  std::string export_relabels() const;

  const preprocess::SegmentStore& store() const { return store_; }
  const std::filesystem::path& review_dir() const { return review_dir_; }
  std::filesystem::path audit_path() const { return review_dir_ / "audit.jsonl"; }
  std::filesystem::path manifest_path() const { return review_dir_ / "manifest.jsonl"; }

 private:
  void publish(std::shared_ptr<std::vector<ReviewItem>> next);

  preprocess::SegmentStore store_;
  std::filesystem::path review_dir_;
  std::map<std::string, std::size_t> index_;
  mutable std::mutex write_mu_;
  Snapshot state_;
  std::uint64_t seq_ = 0;
};

// Fresh items for a store, sorted by (recording id, index).
std::vector<ReviewItem> initial_items(const preprocess::SegmentStore& store);

// Applies audit entries in order to `items`. Throws on an unknown segment
// or an entry that breaks the relabel rule.
void replay(std::vector<ReviewItem>& items, const std::vector<AuditEntry>& audit);
std::vector<AuditEntry> read_audit(const std::filesystem::path& path);

std::vector<ReviewItem> read_review_manifest(const std::filesystem::path& path);

}  // namespace pcg::annotator
