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

#include "pcgkit/preprocess/recording.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "pcgkit/preprocess/wav.hpp"

namespace fs = std::filesystem;

namespace pcg::preprocess {

namespace {

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c); };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// Returns the patient header fields if `path` looks like a CirCor patient
// file: "<id> <num_locations> <fs>".
std::optional<std::tuple<std::string, int, int>> read_patient_header(
    std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  std::istringstream ss(line);
  std::string id;
  int n = 0, rate = 0;
  if (!(ss >> id >> n >> rate) || n <= 0 || rate <= 0) return std::nullopt;
  return std::make_tuple(id, n, rate);
}

std::vector<RecordingMeta> parse_patient_file(const fs::path& txt) {
  std::ifstream in(txt);
  auto header = read_patient_header(in);
  if (!header) throw MetadataError(txt.string() + ": malformed patient header");
  auto [patient, count, rate] = *header;

  std::vector<RecordingMeta> recs;
  std::string line;
  for (int i = 0; i < count; ++i) {
    if (!std::getline(in, line))
      throw MetadataError(txt.string() + ": missing recording rows");
    std::istringstream ss(line);
    std::string loc, hea, wav;
    if (!(ss >> loc >> hea >> wav))
      throw MetadataError(txt.string() + ": malformed recording row '" + line + "'");
    auto location = parse_location(loc);
    if (!location || *location == Location::Single)
      throw MetadataError(txt.string() + ": unknown location '" + loc + "'");
    RecordingMeta m;
    m.wav_path = txt.parent_path() / wav;
    m.recording_id = fs::path(wav).stem().string();
    m.patient_id = patient;
    m.location = *location;
    m.task = Task::Murmur2022;
    m.expected_rate_hz = rate;
    recs.push_back(std::move(m));
  }

  std::optional<ClassLabel> murmur;
  while (std::getline(in, line)) {
    line = trim(line);
    const std::string key = "#Murmur:";
    if (line.rfind(key, 0) == 0) {
      murmur = parse_label(trim(line.substr(key.size())));
      if (!murmur || !label_belongs_to(*murmur, Task::Murmur2022))
        throw MetadataError(txt.string() + ": bad murmur label '" + line + "'");
    }
  }
  if (!murmur) throw MetadataError(txt.string() + ": missing #Murmur label row");
  for (auto& r : recs) r.label = *murmur;
  return recs;
}

std::vector<RecordingMeta> parse_reference_csv(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw MetadataError("cannot open " + csv.string());
  std::vector<RecordingMeta> recs;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw MetadataError(csv.string() + ": malformed row '" + line + "'");
    std::string name = trim(line.substr(0, comma));
    std::string value = trim(line.substr(comma + 1));
    RecordingMeta m;
    m.wav_path = csv.parent_path() / (name + ".wav");
    m.recording_id = name;
    m.patient_id = name;
    m.location = Location::Single;
    m.task = Task::Abnormal2016;
    if (value == "1") {
      m.label = ClassLabel::Abnormal;
    } else if (value == "-1") {
      m.label = ClassLabel::Normal;
    } else if (auto l = parse_label(value); l && label_belongs_to(*l, Task::Abnormal2016)) {
      m.label = *l;
    } else {
      throw MetadataError(csv.string() + ": bad label '" + value + "'");
    }
    recs.push_back(std::move(m));
  }
  return recs;
}

}  // namespace

PcgRecording load_recording(const fs::path& path, const RecordingMeta& meta) {
  if (!label_belongs_to(meta.label, meta.task))
    throw MetadataError(meta.recording_id + ": label " +
                        std::string(to_string(meta.label)) +
                        " does not belong to task " + std::string(to_string(meta.task)));
  if ((meta.location == Location::Single) != (meta.task == Task::Abnormal2016))
    throw MetadataError(meta.recording_id +
                        ": location Single is reserved for the 2016 dataset");

  WavAudio audio = read_wav(path);
  if (meta.expected_rate_hz && *meta.expected_rate_hz != audio.sample_rate_hz)
    throw MetadataError(meta.recording_id + ": header rate " +
                        std::to_string(audio.sample_rate_hz) +
                        " Hz disagrees with metadata " +
                        std::to_string(*meta.expected_rate_hz) + " Hz");
  if (audio.samples.empty()) throw WavError(path.string() + ": no samples");

  PcgRecording rec;
  rec.recording_id = meta.recording_id;
  rec.patient_id = meta.patient_id;
  rec.location = meta.location;
  rec.task = meta.task;
  rec.label = meta.label;
  rec.sample_rate_hz = audio.sample_rate_hz;
  rec.samples = std::move(audio.samples);
  rec.unusual_rate = rec.sample_rate_hz != 2000 && rec.sample_rate_hz != 4000;
  return rec;
}

std::vector<RecordingMeta> scan_physionet2022(const fs::path& root) {
  std::vector<RecordingMeta> all;
  for (const auto& txt : sorted_files(root, ".txt")) {
    auto recs = parse_patient_file(txt);
    all.insert(all.end(), recs.begin(), recs.end());
  }
  if (all.empty()) throw MetadataError(root.string() + ": no patient files found");
  return all;
}

std::vector<RecordingMeta> scan_physionet2016(const fs::path& root) {
  std::vector<fs::path> csvs;
  if (fs::exists(root / "REFERENCE.csv")) csvs.push_back(root / "REFERENCE.csv");
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && fs::exists(e.path() / "REFERENCE.csv"))
      subdirs.push_back(e.path() / "REFERENCE.csv");
  std::sort(subdirs.begin(), subdirs.end());
  csvs.insert(csvs.end(), subdirs.begin(), subdirs.end());
  if (csvs.empty()) throw MetadataError(root.string() + ": no REFERENCE.csv found");

  std::vector<RecordingMeta> all;
  for (const auto& csv : csvs) {
    auto recs = parse_reference_csv(csv);
    all.insert(all.end(), recs.begin(), recs.end());
  }
  return all;
}

std::optional<Task> detect_layout(const fs::path& root) {
  if (!fs::is_directory(root)) return std::nullopt;
  if (fs::exists(root / "REFERENCE.csv")) return Task::Abnormal2016;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::exists(e.path() / "REFERENCE.csv"))
      return Task::Abnormal2016;
    if (e.is_regular_file() && e.path().extension() == ".txt") {
      std::ifstream in(e.path());
      if (read_patient_header(in)) return Task::Murmur2022;
    }
  }
  return std::nullopt;
}

std::vector<RecordingMeta> scan_dataset(const fs::path& root,
                                        std::optional<Task> task) {
  if (!task) task = detect_layout(root);
  if (!task) throw MetadataError(root.string() + ": unrecognized dataset layout");
  return *task == Task::Murmur2022 ? scan_physionet2022(root)
                                   : scan_physionet2016(root);
}

}  // namespace pcg::preprocess
