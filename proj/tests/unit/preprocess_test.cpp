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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "pcgkit/preprocess/butterworth.hpp"
#include "pcgkit/preprocess/recording.hpp"
#include "pcgkit/preprocess/segment.hpp"
#include "pcgkit/preprocess/segment_store.hpp"
#include "pcgkit/preprocess/wav.hpp"
#include "test_util.hpp"

using namespace pcg;
using namespace pcg::preprocess;
using pcg::testing::TempDir;

namespace {

double to_db(double ratio) { return 20.0 * std::log10(ratio); }

double measured_gain(double freq, double fs) {
  const std::size_t n = static_cast<std::size_t>(fs * 2);
  auto x = pcg::testing::sine(freq, fs, n);
  auto y = butterworth_lowpass(x, fs, 5, 500.0);
  return pcg::testing::fitted_amplitude(y, freq, fs, n / 4);
}

PcgRecording make_recording(double seconds, int fs = 4000) {
  PcgRecording rec;
  rec.recording_id = "100_AV";
  rec.patient_id = "100";
  rec.location = Location::AV;
  rec.sample_rate_hz = fs;
  rec.label = ClassLabel::Present;
  rec.samples.resize(static_cast<std::size_t>(seconds * fs));
  for (std::size_t i = 0; i < rec.samples.size(); ++i) rec.samples[i] = double(i);
  return rec;
}

}  // namespace

TEST_CASE("butterworth passes DC with unit gain") {
  std::vector<double> x(8000, 0.7);
  auto y = butterworth_lowpass(x, 4000.0);
  for (std::size_t i = 2000; i < y.size(); ++i) CHECK(y[i] / 0.7 == doctest::Approx(1.0).epsilon(0.001));
}

TEST_CASE("butterworth is -3 dB at the cutoff") {
  const double g = measured_gain(500.0, 4000.0);
  CHECK(g == doctest::Approx(0.7071).epsilon(0.01 / 0.7071));
  CHECK(std::abs(to_db(g) + 3.0103) < 0.3);
}

TEST_CASE("butterworth at 1000 Hz, fs 4000") {
  // The bilinear transform compresses frequencies, so the digital filter
  // attenuates harder than the analog prototype's 1/sqrt(1 + 2^10).
  const double g = measured_gain(1000.0, 4000.0);
  const double analog = 1.0 / std::sqrt(1.0 + std::pow(2.0, 10));
  CHECK(g <= analog);
  CHECK(to_db(g) <= -30.0);
  const double warped = butterworth_digital_magnitude(5, 500, 4000, 1000);
  CHECK(g == doctest::Approx(warped).epsilon(0.01));
}

TEST_CASE("measured attenuation at k * cutoff matches the closed-form magnitude") {
  // fs = 16 kHz keeps 4 * cutoff below Nyquist.
  for (double fs : {4000.0, 16000.0}) {
    for (int k : {1, 2, 4}) {
      const double f = 500.0 * k;
      if (f >= fs / 2) continue;
      const double g = measured_gain(f, fs);
      const double expected = butterworth_digital_magnitude(5, 500, fs, f);
      CAPTURE(fs);
      CAPTURE(k);
      CHECK(std::abs(to_db(g) - to_db(expected)) < 0.3);
      CHECK(std::abs(design_butterworth_lowpass(5, 500, fs).response(f, fs)) ==
            doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("butterworth is linear") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::vector<double> x(4000), y(4000), mix(4000);
  const double a = 1.7, b = -0.4;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = nd(rng);
    y[i] = nd(rng);
    mix[i] = a * x[i] + b * y[i];
  }
  auto fx = butterworth_lowpass(x, 4000), fy = butterworth_lowpass(y, 4000),
       fm = butterworth_lowpass(mix, 4000);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += std::pow(fm[i] - (a * fx[i] + b * fy[i]), 2);
    den += fm[i] * fm[i];
  }
  CHECK(std::sqrt(num / den) < 1e-9);
}

TEST_CASE("butterworth rejects bad parameters") {
  std::vector<double> x(10, 0.0);
  CHECK_THROWS_AS(butterworth_lowpass(x, 1000.0, 5, 500.0), std::invalid_argument);
  CHECK_THROWS_AS(butterworth_lowpass(x, 4000.0, 0, 500.0), std::invalid_argument);
  x[3] = std::nan("");
  CHECK_THROWS_AS(butterworth_lowpass(x, 4000.0), std::invalid_argument);
  CHECK(butterworth_lowpass(std::vector<double>(17, 1.0), 4000).size() == 17);
}

TEST_CASE("segment_recording drops the tail") {
  SegmentationStats stats;
  auto segs = segment_recording(make_recording(10.0), 4, &stats);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].samples.size() == 16000);
  CHECK(segs[1].samples.front() == 16000.0);
  CHECK(segs[1].id() == "100_AV_s1");
  CHECK(segs[1].label == ClassLabel::Present);
  CHECK(stats.too_short == 0);

  CHECK(segment_recording(make_recording(4.0), 4).size() == 1);
  CHECK(segment_recording(make_recording(3.0), 4, &stats).empty());
  CHECK(stats.too_short == 1);
  CHECK_THROWS_AS(segment_recording(make_recording(3.0), 0), std::invalid_argument);
}

TEST_CASE("concatenated segments reproduce the recording prefix") {
  for (double seconds : {5.5, 9.0, 13.25}) {
    auto rec = make_recording(seconds, 2000);
    for (int n : {1, 3, 4}) {
      auto segs = segment_recording(rec, n);
      std::vector<double> cat;
      for (const auto& s : segs) cat.insert(cat.end(), s.samples.begin(), s.samples.end());
      const std::size_t expect = std::size_t(std::floor(seconds / n)) * n * 2000;
      REQUIRE(cat.size() == expect);
      CHECK(std::equal(cat.begin(), cat.end(), rec.samples.begin()));
    }
  }
}

TEST_CASE("zscore uses the population standard deviation") {
  auto y = zscore({1.0, 2.0, 3.0});
  CHECK(y[0] == doctest::Approx(-1.224745).epsilon(1e-6));
  CHECK(y[1] == doctest::Approx(0.0));
  CHECK(y[2] == doctest::Approx(1.224745).epsilon(1e-6));

  std::vector<double> alt(64);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0 : 1.0;
  auto same = zscore(alt);
  for (std::size_t i = 0; i < alt.size(); ++i) CHECK(same[i] == doctest::Approx(alt[i]));

  CHECK_THROWS_AS(zscore({5.0, 5.0, 5.0, 5.0}), FlatSegmentError);
}

TEST_CASE("zscore output statistics and idempotence") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 8.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(1000 + trial * 37);
    for (double& v : x) v = u(rng) * (trial + 1);
    auto y = zscore(x);
    double m = 0, s = 0;
    for (double v : y) m += v;
    m /= double(y.size());
    for (double v : y) s += (v - m) * (v - m);
    s = std::sqrt(s / double(y.size()));
    CHECK(std::abs(m) < 1e-6);
    CHECK(std::abs(s - 1.0) < 1e-6);
    auto z = zscore(y);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(z[i] - y[i]) < 1e-6);
  }
}

TEST_CASE("load_recording reads the rate from the header") {
  TempDir tmp;
  std::vector<double> x(20000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.5 * std::sin(0.01 * double(i));
  write_wav16(tmp.path() / "1_AV.wav", x, 4000);

  RecordingMeta meta;
  meta.recording_id = "1_AV";
  meta.patient_id = "1";
  meta.location = Location::AV;
  meta.label = ClassLabel::Absent;
  auto rec = load_recording(tmp.path() / "1_AV.wav", meta);
  CHECK(rec.samples.size() == 20000);
  CHECK(rec.sample_rate_hz == 4000);
  CHECK(rec.duration_seconds() == doctest::Approx(5.0));
  CHECK_FALSE(rec.unusual_rate);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(rec.samples[i] - x[i]) <= 1.0 / 32768);

  meta.expected_rate_hz = 2000;
  CHECK_THROWS_AS(load_recording(tmp.path() / "1_AV.wav", meta), MetadataError);

  meta.expected_rate_hz.reset();
  CHECK_THROWS_AS(load_recording(tmp.path() / "missing.wav", meta), WavError);
}

TEST_CASE("all-zero payload loads as zeros") {
  TempDir tmp;
  write_wav16(tmp.path() / "z.wav", std::vector<double>(4000, 0.0), 4000);
  RecordingMeta meta;
  meta.location = Location::MV;
  auto rec = load_recording(tmp.path() / "z.wav", meta);
  CHECK(rec.samples.size() == 4000);
  for (double v : rec.samples) CHECK(v == 0.0);
  auto segs = segment_recording(rec, 1);
  REQUIRE(segs.size() == 1);
  CHECK_THROWS_AS(zscore_normalize(segs[0]), FlatSegmentError);
}

TEST_CASE("decode 8-bit and float WAV") {
  // Hand-built headers so the decoder is checked against independent bytes.
  auto header = [](std::uint16_t fmt, std::uint16_t bits, std::uint32_t rate,
                   std::uint32_t data_bytes) {
    std::vector<std::uint8_t> h;
    auto p32 = [&](std::uint32_t v) { for (int i = 0; i < 4; ++i) h.push_back(std::uint8_t(v >> 8 * i)); };
    auto p16 = [&](std::uint16_t v) { h.push_back(std::uint8_t(v)); h.push_back(std::uint8_t(v >> 8)); };
    h.insert(h.end(), {'R', 'I', 'F', 'F'});
    p32(36 + data_bytes);
    h.insert(h.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    p32(16); p16(fmt); p16(1); p32(rate); p32(rate * bits / 8); p16(bits / 8); p16(bits);
    h.insert(h.end(), {'d', 'a', 't', 'a'});
    p32(data_bytes);
    return h;
  };
  auto b8 = header(1, 8, 2000, 3);
  b8.insert(b8.end(), {0, 128, 255});
  auto a8 = decode_wav(b8);
  CHECK(a8.sample_rate_hz == 2000);
  REQUIRE(a8.samples.size() == 3);
  CHECK(a8.samples[0] == -1.0);
  CHECK(a8.samples[1] == 0.0);
  CHECK(a8.samples[2] == doctest::Approx(127.0 / 128));

  auto bf = header(3, 32, 4000, 8);
  float vals[2] = {0.25f, -0.5f};
  const auto* raw = reinterpret_cast<const std::uint8_t*>(vals);
  bf.insert(bf.end(), raw, raw + 8);
  auto af = decode_wav(bf);
  REQUIRE(af.samples.size() == 2);
  CHECK(af.samples[0] == 0.25);
  CHECK(af.samples[1] == -0.5);

  std::vector<std::uint8_t> junk{'n', 'o', 'p', 'e'};
  CHECK_THROWS_AS(decode_wav(junk), WavError);
}

TEST_CASE("2016 layout yields Single location") {
  TempDir tmp;
  write_wav16(tmp.path() / "a0001.wav", pcg::testing::sine(50, 2000, 10000, 0.3), 2000);
  write_wav16(tmp.path() / "a0002.wav", pcg::testing::sine(70, 2000, 10000, 0.3), 2000);
  std::ofstream(tmp.path() / "REFERENCE.csv") << "a0001,1\na0002,-1\n";
  CHECK(detect_layout(tmp.path()) == Task::Abnormal2016);
  auto metas = scan_dataset(tmp.path());
  REQUIRE(metas.size() == 2);
  auto rec = load_recording(metas[0]);
  CHECK(rec.location == Location::Single);
  CHECK(rec.label == ClassLabel::Abnormal);
  CHECK(rec.sample_rate_hz == 2000);
  CHECK(load_recording(metas[1]).label == ClassLabel::Normal);
}

TEST_CASE("2022 layout parses patient files") {
  TempDir tmp;
  write_wav16(tmp.path() / "42_AV.wav", pcg::testing::sine(80, 4000, 20000, 0.3), 4000);
  write_wav16(tmp.path() / "42_MV.wav", pcg::testing::sine(90, 4000, 36000, 0.3), 4000);
  std::ofstream(tmp.path() / "42.txt")
      << "42 2 4000\nAV 42_AV.hea 42_AV.wav 42_AV.tsv\nMV 42_MV.hea 42_MV.wav 42_MV.tsv\n"
         "#Age: Child\n#Murmur: Present\n#Murmur locations: AV\n";
  CHECK(detect_layout(tmp.path()) == Task::Murmur2022);
  auto metas = scan_dataset(tmp.path());
  REQUIRE(metas.size() == 2);
  CHECK(metas[1].location == Location::MV);
  CHECK(metas[1].label == ClassLabel::Present);
  CHECK(metas[0].expected_rate_hz == 4000);

  TempDir out;
  PreprocessOptions opts;
  opts.window_seconds = 4;
  auto summary = build_segment_store(tmp.path(), out.path(), opts);
  CHECK(summary.recordings == 2);
  CHECK(summary.segments == 1 + 2);
  SegmentStore store(out.path());
  CHECK(store.task() == Task::Murmur2022);
  REQUIRE(store.records().size() == 3);
  CHECK(store.records()[0].segment_id == "42_AV_s0");
  auto samples = store.load_samples("42_MV_s1");
  CHECK(samples.size() == 16000);
  double m = 0;
  for (double v : samples) m += v;
  CHECK(std::abs(m / 16000) < 1e-5);
}

TEST_CASE("2022 patient file without a murmur row is rejected") {
  TempDir tmp;
  write_wav16(tmp.path() / "7_AV.wav", std::vector<double>(8000, 0.1), 4000);
  std::ofstream(tmp.path() / "7.txt") << "7 1 4000\nAV 7_AV.hea 7_AV.wav 7_AV.tsv\n#Age: Child\n";
  CHECK_THROWS_AS(scan_physionet2022(tmp.path()), MetadataError);
}
