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

#include "pcgkit/preprocess/segment.hpp"

#include <cmath>

namespace pcg::preprocess {

std::string Segment::id() const {
  return recording_id + "_s" + std::to_string(index);
}

std::vector<Segment> segment_recording(const PcgRecording& rec, int window_seconds,
                                       SegmentationStats* stats) {
  if (window_seconds < 1)
    throw std::invalid_argument("segment_recording: window must be >= 1 second");
  if (rec.sample_rate_hz <= 0)
    throw std::invalid_argument("segment_recording: invalid sample rate");
  const std::size_t len = std::size_t(window_seconds) * rec.sample_rate_hz;
  const std::size_t count = rec.samples.size() / len;
  if (count == 0 && stats) ++stats->too_short;

  std::vector<Segment> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Segment s;
    s.recording_id = rec.recording_id;
    s.patient_id = rec.patient_id;
    s.location = rec.location;
    s.index = static_cast<int>(i);
    s.sample_rate_hz = rec.sample_rate_hz;
    s.window_seconds = window_seconds;
    s.label = rec.label;
    auto first = rec.samples.begin() + static_cast<std::ptrdiff_t>(i * len);
    s.samples.assign(first, first + static_cast<std::ptrdiff_t>(len));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> zscore(const std::vector<double>& x) {
  if (x.empty()) throw FlatSegmentError("zscore: empty segment");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= double(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= double(x.size());
  const double sigma = std::sqrt(var);
  if (!(sigma > kMinSegmentStddev))
    throw FlatSegmentError("zscore: zero variance segment (sigma = " +
                           std::to_string(sigma) + ")");
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - mean) / sigma;
  return y;
}

Segment zscore_normalize(Segment seg) {
  try {
    seg.samples = zscore(seg.samples);
  } catch (const FlatSegmentError& e) {
    throw FlatSegmentError(seg.id() + ": " + e.what());
  }
  return seg;
}

}  // namespace pcg::preprocess
