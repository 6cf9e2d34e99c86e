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

#include "pcgkit/features/feature_map.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pcgkit/common/io.hpp"
#include "pcgkit/features/mfcc.hpp"
#include "pcgkit/features/scattering.hpp"
#include "pcgkit/features/stft.hpp"

namespace pcg::features {

static_assert(std::endian::native == std::endian::little);

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::STFT: return "stft";
    case FeatureKind::MFCC: return "mfcc";
    case FeatureKind::WST: return "wst";
  }
  return "?";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view s) {
  if (s == "stft" || s == "STFT") return FeatureKind::STFT;
  if (s == "mfcc" || s == "MFCC") return FeatureKind::MFCC;
  if (s == "wst" || s == "WST") return FeatureKind::WST;
  return std::nullopt;
}

std::string FeatureParams::canonical(FeatureKind kind) const {
  std::ostringstream s;
  s.precision(17);
  s << "kind=" << to_string(kind) << ";fs=" << sample_rate_hz;
  switch (kind) {
    case FeatureKind::STFT:
      s << ";nfft=" << nfft << ";hop=" << hop;
      break;
    case FeatureKind::MFCC:
      s << ";nfft=" << nfft << ";hop=" << hop << ";n_mfcc=" << n_mfcc
        << ";n_mels=" << n_mels << ";alpha=" << pre_emphasis_alpha
        << ";floor=" << log_floor;
      break;
    case FeatureKind::WST:
      s << ";J=" << wst_J << ";Q=" << wst_Q << ";order=" << wst_order
        << ";log=" << log_scattering;
      if (log_scattering) s << ";floor=" << log_floor;
      break;
  }
  return s.str();
}

std::uint64_t FeatureParams::hash(FeatureKind kind) const {
  return fnv1a64(canonical(kind));
}

namespace {

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw FeatureFileError("truncated feature file");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_feature_map(const std::filesystem::path& path, const FeatureMap& map) {
  std::string out = "PCGF";
  put<std::uint32_t>(out, kVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(map.kind));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(map.data.rows));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(map.data.cols));
  put<std::uint64_t>(out, map.params.hash(map.kind));
  out.reserve(out.size() + map.data.data.size() * 4);
  for (double v : map.data.data) put<float>(out, static_cast<float>(v));
  write_file_atomic(path, out);
}

LoadedFeatures load_feature_map(const std::filesystem::path& path) {
  const std::string in = read_text_file(path);
  if (in.size() < 4 || in.compare(0, 4, "PCGF") != 0)
    throw FeatureFileError(path.string() + ": bad magic");
  std::size_t pos = 4;
  if (get<std::uint32_t>(in, pos) != kVersion)
    throw FeatureFileError(path.string() + ": unsupported version");
  auto kind = static_cast<FeatureKind>(get<std::uint8_t>(in, pos));
  if (kind != FeatureKind::STFT && kind != FeatureKind::MFCC && kind != FeatureKind::WST)
    throw FeatureFileError(path.string() + ": bad kind");
  const std::size_t rows = get<std::uint32_t>(in, pos);
  const std::size_t cols = get<std::uint32_t>(in, pos);
  const std::uint64_t hash = get<std::uint64_t>(in, pos);
  if (in.size() - pos != rows * cols * sizeof(float))
    throw FeatureFileError(path.string() + ": payload size mismatch");
  LoadedFeatures f{kind, hash, Matrix(rows, cols)};
  for (double& v : f.data.data) v = get<float>(in, pos);
  return f;
}

FeatureMap extract(FeatureKind kind, std::span<const double> x,
                   const FeatureParams& params) {
  switch (kind) {
    case FeatureKind::STFT: return stft(x, params);
    case FeatureKind::MFCC: return mfcc(x, params);
    case FeatureKind::WST: {
      FeatureMap m = wst(x, params);
      if (params.log_scattering) log_scale(m.data, params.log_floor);
      return m;
    }
  }
  throw std::invalid_argument("extract: unknown feature kind");
}

}  // namespace pcg::features
