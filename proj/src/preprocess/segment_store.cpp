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

#include "pcgkit/preprocess/segment_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iostream>

#include "pcgkit/common/io.hpp"
#include "pcgkit/common/parallel.hpp"
#include "pcgkit/preprocess/butterworth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pcg::preprocess {

static_assert(std::endian::native == std::endian::little,
              "segment files are written in host order; big-endian hosts need a swap");

void write_f32(const fs::path& path, const std::vector<double>& x) {
  std::vector<float> f(x.begin(), x.end());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(f.data()),
            static_cast<std::streamsize>(f.size() * sizeof(float)));
}

std::vector<double> read_f32(const fs::path& path) {
  std::string bytes = read_text_file(path);
  if (bytes.size() % sizeof(float) != 0)
    throw std::runtime_error(path.string() + ": size is not a multiple of 4");
  std::vector<float> f(bytes.size() / sizeof(float));
  std::memcpy(f.data(), bytes.data(), bytes.size());
  return {f.begin(), f.end()};
}

namespace {

json record_to_json(const SegmentRecord& r) {
  return json{{"segment_id", r.segment_id},
              {"recording_id", r.recording_id},
              {"patient_id", r.patient_id},
              {"location", to_string(r.location)},
              {"index", r.index},
              {"sample_rate_hz", r.sample_rate_hz},
              {"window_seconds", r.window_seconds},
              {"label", to_string(r.label)},
              {"num_samples", r.num_samples}};
}

SegmentRecord record_from_json(const json& j) {
  SegmentRecord r;
  r.segment_id = j.at("segment_id").get<std::string>();
  r.recording_id = j.at("recording_id").get<std::string>();
  r.patient_id = j.at("patient_id").get<std::string>();
  auto loc = parse_location(j.at("location").get<std::string>());
  auto label = parse_label(j.at("label").get<std::string>());
  if (!loc || !label) throw std::runtime_error("bad location/label in " + r.segment_id);
  r.location = *loc;
  r.label = *label;
  r.index = j.at("index").get<int>();
  r.sample_rate_hz = j.at("sample_rate_hz").get<int>();
  r.window_seconds = j.at("window_seconds").get<int>();
  r.num_samples = j.at("num_samples").get<std::size_t>();
  return r;
}

}  // namespace

SegmentStore::SegmentStore(fs::path dir) : dir_(std::move(dir)) {
  json meta = json::parse(read_text_file(dir_ / "store.json"));
  auto task = parse_task(meta.at("task").get<std::string>());
  if (!task) throw std::runtime_error(dir_.string() + ": bad task in store.json");
  task_ = *task;
  window_seconds_ = meta.at("window_seconds").get<int>();
  for (const auto& j : read_jsonl(dir_ / "index.jsonl"))
    records_.push_back(record_from_json(j));
  if (fs::exists(dir_ / "rejected.jsonl")) {
    for (const auto& j : read_jsonl(dir_ / "rejected.jsonl")) {
      RejectedSegment r;
      r.segment_id = j.at("segment_id").get<std::string>();
      r.recording_id = j.at("recording_id").get<std::string>();
      r.label = parse_label(j.at("label").get<std::string>()).value_or(ClassLabel::Unknown);
      r.reason = j.value("reason", "");
      rejected_.push_back(std::move(r));
    }
  }
}

std::ptrdiff_t SegmentStore::find(const std::string& segment_id) const {
  for (std::size_t i = 0; i < records_.size(); ++i)
    if (records_[i].segment_id == segment_id) return static_cast<std::ptrdiff_t>(i);
  return -1;
}

std::vector<double> SegmentStore::load_samples(const std::string& segment_id) const {
  return read_f32(dir_ / "segments" / (segment_id + ".f32"));
}

StoreSummary build_segment_store(const fs::path& dataset_root, const fs::path& out_dir,
                                 const PreprocessOptions& options) {
  const auto metas = scan_dataset(dataset_root);
  fs::create_directories(out_dir / "segments");

  struct Result {
    std::vector<SegmentRecord> kept;
    std::vector<RejectedSegment> rejected;
    bool too_short = false;
    bool unusual_rate = false;
  };
  std::vector<Result> results(metas.size());

  parallel_for(metas.size(), options.workers, [&](std::size_t i) {
    PcgRecording rec = load_recording(metas[i]);
    rec.samples = butterworth_lowpass(rec.samples, rec.sample_rate_hz,
                                      options.filter_order, options.cutoff_hz);
    SegmentationStats stats;
    auto segments = segment_recording(rec, options.window_seconds, &stats);
    Result& r = results[i];
    r.too_short = stats.too_short > 0;
    r.unusual_rate = rec.unusual_rate;
    for (auto& seg : segments) {
      const std::string id = seg.id();
      try {
        seg = zscore_normalize(std::move(seg));
      } catch (const FlatSegmentError& e) {
        r.rejected.push_back({id, seg.recording_id, seg.label, e.what()});
        continue;
      }
      write_f32(out_dir / "segments" / (id + ".f32"), seg.samples);
      SegmentRecord rec_out;
      rec_out.segment_id = id;
      rec_out.recording_id = seg.recording_id;
      rec_out.patient_id = seg.patient_id;
      rec_out.location = seg.location;
      rec_out.index = seg.index;
      rec_out.sample_rate_hz = seg.sample_rate_hz;
      rec_out.window_seconds = seg.window_seconds;
      rec_out.label = seg.label;
      rec_out.num_samples = seg.samples.size();
      r.kept.push_back(std::move(rec_out));
    }
  });

  StoreSummary summary;
  summary.task = metas.front().task;
  summary.window_seconds = options.window_seconds;
  summary.recordings = metas.size();
  std::vector<json> index, rejected;
  for (const auto& r : results) {
    for (const auto& k : r.kept) index.push_back(record_to_json(k));
    for (const auto& x : r.rejected)
      rejected.push_back({{"segment_id", x.segment_id},
                          {"recording_id", x.recording_id},
                          {"label", to_string(x.label)},
                          {"reason", x.reason}});
    summary.too_short += r.too_short;
    summary.unusual_rate += r.unusual_rate;
  }
  summary.segments = index.size();
  summary.rejected = rejected.size();
  if (summary.too_short > 0)
    std::cerr << "warning: " << summary.too_short
              << " recording(s) shorter than one window produced no segments\n";

  write_file_atomic(out_dir / "index.jsonl", to_jsonl(index));
  write_file_atomic(out_dir / "rejected.jsonl", to_jsonl(rejected));
  json meta{{"task", to_string(summary.task)},
            {"window_seconds", options.window_seconds},
            {"filter", {{"order", options.filter_order}, {"cutoff_hz", options.cutoff_hz}}},
            {"dataset_root", fs::absolute(dataset_root).string()},
            {"recordings", summary.recordings},
            {"segments", summary.segments},
            {"rejected", summary.rejected},
            {"too_short", summary.too_short},
            {"unusual_rate", summary.unusual_rate}};
  write_file_atomic(out_dir / "store.json", meta.dump(2));
  return summary;
}

}  // namespace pcg::preprocess
