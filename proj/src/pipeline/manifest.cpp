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

#include "pcgkit/pipeline/manifest.hpp"

#include <map>

#include "pcgkit/common/io.hpp"

namespace pcg::pipeline {
namespace {

ClassLabel label_field(const nlohmann::json& j, const char* key) {
  const auto s = j.at(key).get<std::string>();
  auto l = parse_label(s);
  if (!l) throw ManifestError(std::string("unknown label '") + s + "' in field " + key);
  return *l;
}

}  // namespace

bool relabel_allowed(ClassLabel from, ClassLabel to) {
  if (from == to) return true;
  return to == ClassLabel::Unknown && (from == ClassLabel::Present || from == ClassLabel::Absent);
}

std::string_view relabel_rule_text() {
  return "only Present->Unknown and Absent->Unknown relabels are allowed";
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::None: return "none";
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "none";
}

std::optional<Split> parse_split(std::string_view s) {
  for (Split v : {Split::None, Split::Train, Split::Val, Split::Test})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::string ManifestEntry::group() const {
  return patient_id + "/" + std::string(pcg::to_string(location));
}

std::size_t DatasetManifest::relabeled() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.label != e.effective;
  return n;
}

std::string_view DatasetManifest::dataset_tag() const {
  return task == Task::Murmur2022 ? "PCG2022" : "PCG2016";
}

std::vector<RelabelEntry> read_relabel_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::vector<RelabelEntry> out;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = path.string() + ":" + std::to_string(line_no);
    RelabelEntry e;
    try {
      const auto j = nlohmann::json::parse(line);
      e.segment_id = j.at("segment_id").get<std::string>();
      e.from = label_field(j, "from");
      e.to = label_field(j, "to");
    } catch (const nlohmann::json::exception& ex) {
      throw ManifestError(where + ": malformed relabel entry: " + ex.what());
    } catch (const ManifestError& ex) {
      throw ManifestError(where + ": " + ex.what());
    }
    if (!relabel_allowed(e.from, e.to))
      throw ManifestError(where + ": " + std::string(pcg::to_string(e.from)) + "->" +
                          std::string(pcg::to_string(e.to)) + " rejected; " +
                          std::string(relabel_rule_text()));
    out.push_back(std::move(e));
    if (end == text.size()) break;
  }
  return out;
}

std::string relabel_line(const RelabelEntry& e) {
  return nlohmann::json{{"segment_id", e.segment_id},
                        {"from", std::string(pcg::to_string(e.from))},
                        {"to", std::string(pcg::to_string(e.to))}}
      .dump();
}

void apply_relabels(DatasetManifest& m, const std::vector<RelabelEntry>& relabels) {
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < m.entries.size(); ++i) by_id[m.entries[i].segment_id] = i;
  std::map<std::string, ClassLabel> seen;
  for (const auto& r : relabels) {
    if (!relabel_allowed(r.from, r.to))
      throw ManifestError(r.segment_id + ": " + std::string(relabel_rule_text()));
    auto it = by_id.find(r.segment_id);
    if (it == by_id.end()) throw ManifestError("relabel names unknown segment " + r.segment_id);
    auto& e = m.entries[it->second];
    if (e.label != r.from)
      throw ManifestError(r.segment_id + ": relabel says from " +
                          std::string(pcg::to_string(r.from)) + " but the segment is " +
                          std::string(pcg::to_string(e.label)));
    auto [pos, fresh] = seen.emplace(r.segment_id, r.to);
    if (!fresh && pos->second != r.to)
      throw ManifestError(r.segment_id + ": conflicting relabel entries");
    e.effective = r.to;
  }
}

DatasetManifest build_manifest(const preprocess::SegmentStore& store,
                               const std::optional<std::filesystem::path>& relabel_file) {
  DatasetManifest m;
  m.task = store.task();
  m.window_seconds = store.window_seconds();
  m.entries.reserve(store.records().size());
  for (const auto& r : store.records()) {
    ManifestEntry e;
    e.segment_id = r.segment_id;
    e.recording_id = r.recording_id;
    e.patient_id = r.patient_id;
    e.location = r.location;
    e.index = r.index;
    e.label = e.effective = r.label;
    m.entries.push_back(std::move(e));
  }
  if (relabel_file) apply_relabels(m, read_relabel_file(*relabel_file));
  return m;
}

nlohmann::json to_json(const ManifestEntry& e, Task task) {
  return {{"segment_id", e.segment_id},
          {"recording_id", e.recording_id},
          {"patient_id", e.patient_id},
          {"location", std::string(pcg::to_string(e.location))},
          {"index", e.index},
          {"label", std::string(pcg::to_string(e.label))},
          {"effective_label", std::string(pcg::to_string(e.effective))},
          {"split", std::string(to_string(e.split))},
          {"task", std::string(pcg::to_string(task))}};
}

ManifestEntry manifest_entry_from_json(const nlohmann::json& j) {
  ManifestEntry e;
  e.segment_id = j.at("segment_id").get<std::string>();
  e.recording_id = j.at("recording_id").get<std::string>();
  e.patient_id = j.at("patient_id").get<std::string>();
  auto loc = parse_location(j.at("location").get<std::string>());
  if (!loc) throw ManifestError(e.segment_id + ": bad location");
  e.location = *loc;
  e.index = j.at("index").get<int>();
  e.label = label_field(j, "label");
  e.effective = label_field(j, "effective_label");
  auto sp = parse_split(j.value("split", "none"));
  if (!sp) throw ManifestError(e.segment_id + ": bad split");
  e.split = *sp;
  return e;
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  std::string out = nlohmann::json{{"dataset", std::string(m.dataset_tag())},
                                   {"task", std::string(pcg::to_string(m.task))},
                                   {"window_seconds", m.window_seconds}}
                        .dump() +
                    "\n";
  for (const auto& e : m.entries) out += to_json(e, m.task).dump() + "\n";
  write_file_atomic(path, out);
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const auto rows = read_jsonl(path);
  if (rows.empty() || !rows.front().contains("dataset"))
    throw ManifestError(path.string() + ": missing manifest header line");
  DatasetManifest m;
  auto task = parse_task(rows.front().at("task").get<std::string>());
  if (!task) throw ManifestError(path.string() + ": bad task");
  m.task = *task;
  m.window_seconds = rows.front().at("window_seconds").get<int>();
  for (std::size_t i = 1; i < rows.size(); ++i)
    m.entries.push_back(manifest_entry_from_json(rows[i]));
  check_invariants(m);
  return m;
}

void check_invariants(const DatasetManifest& m) {
  std::map<std::string, Split> patient_split;
  for (const auto& e : m.entries) {
    if (!relabel_allowed(e.label, e.effective))
      throw ManifestError(e.segment_id + ": effective label breaks the rule; " +
                          std::string(relabel_rule_text()));
    if (e.split == Split::None) continue;
    auto [it, fresh] = patient_split.emplace(e.patient_id, e.split);
    if (!fresh && it->second != e.split)
      throw ManifestError("patient " + e.patient_id + " spans more than one split");
  }
}

std::vector<std::size_t> class_counts(const DatasetManifest& m,
                                      const std::vector<ClassLabel>& classes,
                                      std::optional<Split> split) {
  std::vector<std::size_t> n(classes.size(), 0);
  for (const auto& e : m.entries) {
    if (split && e.split != *split) continue;
    for (std::size_t c = 0; c < classes.size(); ++c)
      if (classes[c] == e.effective) ++n[c];
  }
  return n;
}

}  // namespace pcg::pipeline
