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

#include "pcgkit/annotator/render.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pcg::annotator {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(std::uint8_t(v >> s));
}

void chunk(std::vector<std::uint8_t>& out, const char type[4], std::span<const std::uint8_t> data) {
  put_u32(out, std::uint32_t(data.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + start, uInt(out.size() - start));
  put_u32(out, std::uint32_t(crc));
}

}  // namespace

std::vector<std::uint8_t> encode_png_rgb(std::size_t width, std::size_t height,
                                         std::span<const std::uint8_t> rgb) {
  if (width == 0 || height == 0 || width > 0x7fffffff || height > 0x7fffffff)
    throw std::invalid_argument("png: bad dimensions");
  if (rgb.size() != width * height * 3) throw std::invalid_argument("png: pixel buffer size mismatch");
  std::vector<std::uint8_t> raw;
  raw.reserve(height * (1 + width * 3));
  for (std::size_t y = 0; y < height; ++y) {
    raw.push_back(0);
    raw.insert(raw.end(), rgb.begin() + std::ptrdiff_t(y * width * 3),
               rgb.begin() + std::ptrdiff_t((y + 1) * width * 3));
  }
  uLongf zlen = compressBound(uLong(raw.size()));
  std::vector<std::uint8_t> z(zlen);
  if (compress2(z.data(), &zlen, raw.data(), uLong(raw.size()), 6) != Z_OK)
    throw std::runtime_error("png: zlib compression failed");
  z.resize(zlen);

  std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, std::uint32_t(width));
  put_u32(ihdr, std::uint32_t(height));
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // 8-bit RGB
  chunk(out, "IHDR", ihdr);
  chunk(out, "IDAT", z);
  chunk(out, "IEND", {});
  return out;
}

std::array<std::uint8_t, 3> colormap(double t) {
  static constexpr double stops[5][3] = {
      {13, 8, 135}, {84, 2, 163}, {185, 50, 137}, {249, 142, 8}, {240, 249, 33}};
  if (!(t > 0.0)) t = 0.0;
  t = std::min(t, 1.0) * 4.0;
  const int i = std::min(3, int(t));
  const double f = t - i;
  std::array<std::uint8_t, 3> c{};
  for (int k = 0; k < 3; ++k)
    c[std::size_t(k)] = std::uint8_t(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  return c;
}

RenderedImage render_matrix(const features::Matrix& m, int scale) {
  if (scale < 1) throw std::invalid_argument("render: scale must be >= 1");
  if (m.rows == 0 || m.cols == 0) throw std::invalid_argument("render: empty feature map");
  const auto [lo, hi] = std::minmax_element(m.data.begin(), m.data.end());
  const double span = *hi - *lo;
  RenderedImage img;
  const std::size_t s = std::size_t(scale);
  img.width = m.cols * s;
  img.height = m.rows * s;
  std::vector<std::uint8_t> rgb(img.width * img.height * 3);
  for (std::size_t y = 0; y < img.height; ++y) {
    const std::size_t r = m.rows - 1 - y / s;
    for (std::size_t x = 0; x < img.width; ++x) {
      const double t = span > 0.0 ? (m(r, x / s) - *lo) / span : 0.0;
      const auto c = colormap(t);
      std::copy(c.begin(), c.end(), rgb.begin() + std::ptrdiff_t((y * img.width + x) * 3));
    }
  }
  img.png = encode_png_rgb(img.width, img.height, rgb);
  return img;
}

RenderedImage render_segment(features::FeatureKind kind, std::span<const double> samples,
                             int sample_rate_hz, int scale) {
  features::FeatureParams p;
  p.sample_rate_hz = sample_rate_hz;
  p.log_scattering = true;
  if (kind == features::FeatureKind::MFCC) throw std::invalid_argument("render: only wst and stft images");
  features::FeatureMap fm = features::extract(kind, samples, p);
  if (kind == features::FeatureKind::STFT)
    for (double& v : fm.data.data) v = std::log10(std::max(v, 1e-10));
  return render_matrix(fm.data, scale);
}

}  // namespace pcg::annotator
