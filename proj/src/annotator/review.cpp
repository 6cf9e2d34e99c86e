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

#include "pcgkit/annotator/review.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "pcgkit/common/io.hpp"
#include "pcgkit/pipeline/manifest.hpp"

namespace pcg::annotator {
namespace fs = std::filesystem;
namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, int(ms));
  return out;
}

ClassLabel label_of(const nlohmann::json& j, const char* key) {
  auto l = parse_label(j.at(key).get<std::string>());
  if (!l) throw std::runtime_error(std::string("bad label in field ") + key);
  return *l;
}

void apply_entry(ReviewItem& item, ClassLabel to, const std::string& note) {
  item.effective = to;
  item.status = to == item.original ? ReviewStatus::Confirmed : ReviewStatus::Relabeled;
  item.note = note;
}

std::string manifest_text(const std::vector<ReviewItem>& items) {
  std::string out;
  for (const auto& it : items) out += to_json(it).dump() + "\n";
  return out;
}

}  // namespace

std::string_view to_string(ReviewStatus s) {
  switch (s) {
    case ReviewStatus::Unreviewed: return "unreviewed";
    case ReviewStatus::Confirmed: return "confirmed";
    case ReviewStatus::Relabeled: return "relabeled";
  }
  return "unreviewed";
}

std::optional<ReviewStatus> parse_status(std::string_view s) {
  for (auto v : {ReviewStatus::Unreviewed, ReviewStatus::Confirmed, ReviewStatus::Relabeled})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

nlohmann::json to_json(const ReviewItem& i) {
  return {{"segment_id", i.segment_id},
          {"recording_id", i.recording_id},
          {"patient_id", i.patient_id},
          {"location", std::string(pcg::to_string(i.location))},
          {"index", i.index},
          {"original_label", std::string(pcg::to_string(i.original))},
          {"effective_label", std::string(pcg::to_string(i.effective))},
          {"status", std::string(to_string(i.status))},
          {"note", i.note}};
}

nlohmann::json to_json(const AuditEntry& e) {
  return {{"seq", e.seq},
          {"timestamp", e.timestamp},
          {"segment_id", e.segment_id},
          {"from", std::string(pcg::to_string(e.from))},
          {"to", std::string(pcg::to_string(e.to))},
          {"note", e.note}};
}

AuditEntry audit_entry_from_json(const nlohmann::json& j) {
  AuditEntry e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.timestamp = j.value("timestamp", "");
  e.segment_id = j.at("segment_id").get<std::string>();
  e.from = label_of(j, "from");
  e.to = label_of(j, "to");
  e.note = j.value("note", "");
  return e;
}

std::vector<ReviewItem> initial_items(const preprocess::SegmentStore& store) {
  std::vector<ReviewItem> items;
  for (const auto& r : store.records()) {
    ReviewItem it;
    it.segment_id = r.segment_id;
    it.recording_id = r.recording_id;
    it.patient_id = r.patient_id;
    it.location = r.location;
    it.index = r.index;
    it.original = it.effective = r.label;
    items.push_back(std::move(it));
  }
  std::stable_sort(items.begin(), items.end(), [](const ReviewItem& a, const ReviewItem& b) {
    return std::tie(a.recording_id, a.index) < std::tie(b.recording_id, b.index);
  });
  return items;
}

void replay(std::vector<ReviewItem>& items, const std::vector<AuditEntry>& audit) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < items.size(); ++i) idx[items[i].segment_id] = i;
  for (const auto& e : audit) {
    auto it = idx.find(e.segment_id);
    if (it == idx.end()) throw std::runtime_error("audit names unknown segment " + e.segment_id);
    auto& item = items[it->second];
    if (e.from != item.original)
      throw std::runtime_error("audit entry " + std::to_string(e.seq) + " disagrees with the original label of " +
                               e.segment_id);
    if (!pipeline::relabel_allowed(e.from, e.to))
      throw std::runtime_error("audit entry " + std::to_string(e.seq) + " breaks the rule: " +
                               std::string(pipeline::relabel_rule_text()));
    apply_entry(item, e.to, e.note);
  }
}

std::vector<AuditEntry> read_audit(const fs::path& path) {
  std::vector<AuditEntry> out;
  if (!fs::exists(path)) return out;
  for (const auto& j : read_jsonl(path)) out.push_back(audit_entry_from_json(j));
  return out;
}

std::vector<ReviewItem> read_review_manifest(const fs::path& path) {
  std::vector<ReviewItem> out;
  for (const auto& j : read_jsonl(path)) {
    ReviewItem i;
    i.segment_id = j.at("segment_id").get<std::string>();
    i.recording_id = j.at("recording_id").get<std::string>();
    i.patient_id = j.at("patient_id").get<std::string>();
    i.location = parse_location(j.at("location").get<std::string>()).value_or(Location::Single);
    i.index = j.at("index").get<int>();
    i.original = label_of(j, "original_label");
    i.effective = label_of(j, "effective_label");
    auto st = parse_status(j.at("status").get<std::string>());
    if (!st) throw std::runtime_error(path.string() + ": bad status");
    i.status = *st;
    i.note = j.value("note", "");
    out.push_back(std::move(i));
  }
  return out;
}

ReviewStore::ReviewStore(const fs::path& store_dir, fs::path review_dir)
    : store_(store_dir), review_dir_(std::move(review_dir)) {
  if (review_dir_.empty()) review_dir_ = store_dir / "review";
  fs::create_directories(review_dir_);
  auto items = std::make_shared<std::vector<ReviewItem>>(initial_items(store_));
  for (std::size_t i = 0; i < items->size(); ++i) index_[(*items)[i].segment_id] = i;
  // The audit log is authoritative; the manifest is rewritten from it.
  const auto audit = read_audit(audit_path());
  replay(*items, audit);
  if (!audit.empty()) seq_ = audit.back().seq;
  write_file_atomic(manifest_path(), manifest_text(*items));
  std::atomic_store(&state_, Snapshot(std::move(items)));
}

Snapshot ReviewStore::snapshot() const { return std::atomic_load(&state_); }

void ReviewStore::publish(std::shared_ptr<std::vector<ReviewItem>> next) {
  std::atomic_store(&state_, Snapshot(std::move(next)));
}

Page ReviewStore::list(std::optional<ReviewStatus> status, std::size_t page, std::size_t page_size) const {
  const auto snap = snapshot();
  Page p;
  p.page = page;
  p.page_size = page_size;
  const std::size_t skip = (page - 1) * page_size;
  for (const auto& it : *snap) {
    if (status && it.status != *status) continue;
    if (p.total >= skip && p.items.size() < page_size) p.items.push_back(it);
    ++p.total;
  }
  return p;
}

std::optional<ReviewItem> ReviewStore::find(const std::string& segment_id) const {
  auto it = index_.find(segment_id);
  if (it == index_.end()) return std::nullopt;
  return (*snapshot())[it->second];
}

Decision ReviewStore::decide(const std::string& segment_id, std::string_view to, const std::string& note) {
  auto pos = index_.find(segment_id);
  if (pos == index_.end()) return {Outcome::NotFound, std::nullopt, "unknown segment " + segment_id};
  std::lock_guard lock(write_mu_);
  const auto cur = snapshot();
  const ReviewItem& item = (*cur)[pos->second];
  ClassLabel target;
  if (to == "confirm") {
    target = item.original;
  } else if (auto l = parse_label(to)) {
    target = *l;
  } else {
    return {Outcome::Illegal, std::nullopt, "unknown target '" + std::string(to) + "'"};
  }
  if (!pipeline::relabel_allowed(item.original, target))
    return {Outcome::Illegal, item,
            std::string(pcg::to_string(item.original)) + "->" + std::string(pcg::to_string(target)) +
                " rejected: " + std::string(pipeline::relabel_rule_text())};

  AuditEntry e{seq_ + 1, utc_now(), segment_id, item.original, target, note};
  append_line(audit_path(), to_json(e).dump());
  seq_ = e.seq;
  auto next = std::make_shared<std::vector<ReviewItem>>(*cur);
  apply_entry((*next)[pos->second], target, note);
  write_file_atomic(manifest_path(), manifest_text(*next));
  ReviewItem updated = (*next)[pos->second];
  publish(std::move(next));
  return {Outcome::Ok, updated, {}};
}

std::string ReviewStore::export_relabels() const {
  std::string out;
  for (const auto& it : *snapshot())
    if (it.effective != it.original)
      out += pipeline::relabel_line({it.segment_id, it.original, it.effective}) + "\n";
  return out;
}

}  // namespace pcg::annotator
