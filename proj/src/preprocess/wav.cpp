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

#include "pcgkit/preprocess/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace pcg::preprocess {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

double decode_sample(const std::uint8_t* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat) {
    float f;
    std::uint32_t u = le32(p);
    std::memcpy(&f, &u, sizeof f);
    return f;
  }
  switch (bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case 24: {
      std::int32_t v = std::int32_t(p[0]) | std::int32_t(p[1]) << 8 |
                       std::int32_t(p[2]) << 16;
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    case 32:
      return static_cast<std::int32_t>(le32(p)) / 2147483648.0;
  }
  throw WavError("unsupported bit depth " + std::to_string(bits));
}

}  // namespace

WavAudio decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw WavError("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    std::uint32_t size = le32(chunk + 4);
    std::size_t body = pos + 8;
    std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || avail < 16) throw WavError("truncated fmt chunk");
      const std::uint8_t* f = bytes.data() + body;
      format = le16(f);
      channels = le16(f + 2);
      rate = le32(f + 4);
      bits = le16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 40 || avail < 40) throw WavError("truncated extensible fmt chunk");
        format = le16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw WavError("data chunk before fmt chunk");
      if (format != kFormatPcm && format != kFormatFloat)
        throw WavError("unsupported WAV format tag " + std::to_string(format));
      if (format == kFormatFloat && bits != 32)
        throw WavError("only 32-bit float WAV is supported");
      if (channels == 0 || rate == 0 || bits % 8 != 0 || bits == 0)
        throw WavError("invalid fmt chunk");
      // Some writers leave size = 0xFFFFFFFF for streamed output.
      std::size_t data_size = std::min<std::size_t>(size, avail);
      std::size_t frame_bytes = std::size_t(channels) * (bits / 8);
      std::size_t frames = data_size / frame_bytes;

      WavAudio audio;
      audio.sample_rate_hz = static_cast<int>(rate);
      audio.bits_per_sample = bits;
      audio.samples.resize(frames);
      const std::uint8_t* d = bytes.data() + body;
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c)
          acc += decode_sample(d + i * frame_bytes + c * (bits / 8), format, bits);
        audio.samples[i] = acc / channels;
      }
      return audio;
    }
    pos = body + size + (size & 1);
  }
  throw WavError("no data chunk");
}

WavAudio read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const WavError& e) {
    throw WavError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav16(std::span<const double> samples,
                                       int sample_rate_hz) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(sample_rate_hz));
  put32(out, static_cast<std::uint32_t>(sample_rate_hz) * 2);
  put16(out, 2);
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, data_bytes);
  for (double s : samples) {
    long q = std::lround(std::clamp(s, -1.0, 1.0) * 32768.0);
    auto v = static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L));
    put16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

void write_wav16(const std::filesystem::path& path,
                 std::span<const double> samples, int sample_rate_hz) {
  auto bytes = encode_wav16(samples, sample_rate_hz);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WavError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace pcg::preprocess
