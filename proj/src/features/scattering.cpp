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

#include "pcgkit/features/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "pcgkit/features/fft.hpp"

namespace pcg::features {
namespace {

constexpr double kSigma0 = 0.1;
constexpr double kXiMax = 0.35;
const double kRPsi = std::sqrt(0.5);

// Gaussian centered at xi, periodized over five neighbouring periods.
double periodized_gauss(double omega, double xi, double sigma) {
  double v = 0.0;
  for (int s = -2; s <= 2; ++s) {
    const double d = omega + s - xi;
    v += std::exp(-d * d / (2.0 * sigma * sigma));
  }
  return v;
}

std::vector<double> morlet_hat(std::size_t p, double xi, double sigma) {
  const double beta = periodized_gauss(0.0, xi, sigma) / periodized_gauss(0.0, 0.0, sigma);
  std::vector<double> h(p);
  for (std::size_t k = 0; k < p; ++k) {
    const double w = double(k) / double(p);
    h[k] = periodized_gauss(w, xi, sigma) - beta * periodized_gauss(w, 0.0, sigma);
  }
  h[0] = 0.0;
  return h;
}

// Bandwidth for which neighbouring wavelets, spaced by 2^(1/q), cross at
// r_psi of their peak.
double sigma_for(double xi, int q) {
  const double f = std::pow(2.0, -1.0 / q);
  return xi * (1.0 - f) / (1.0 + f) / std::sqrt(2.0 * std::log(1.0 / kRPsi));
}

std::vector<std::pair<double, double>> wavelet_params(int q, double sigma_low) {
  std::vector<std::pair<double, double>> out;
  const double step = std::pow(2.0, 1.0 / q);
  double xi = std::max(1.0 / (1.0 + std::pow(2.0, 3.0 / q)), kXiMax);
  double sigma = sigma_for(xi, q);
  while (sigma > sigma_low) {
    out.emplace_back(xi, sigma);
    xi /= step;
    sigma /= step;
  }
  // Constant-bandwidth fill between the last geometric wavelet and DC.
  const double last_xi = out.empty() ? xi : out.back().first;
  for (int i = 1; i < q; ++i)
    out.emplace_back(double(q - i) / q * last_xi, sigma_low);
  return out;
}

// Scales one order's wavelets so that
// |phi_hat(w)|^2 + 1/2 sum (|psi_hat(w)|^2 + |psi_hat(-w)|^2) <= 1 on the grid.
void normalize_order(std::vector<MorletFilterBank::Wavelet>& bank,
                     const std::vector<double>& phi) {
  const std::size_t p = phi.size();
  double c2 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p; ++k) {
    const std::size_t mk = (p - k) % p;
    double lp = 0.0;
    for (const auto& w : bank) lp += 0.5 * (w.hat[k] * w.hat[k] + w.hat[mk] * w.hat[mk]);
    if (lp <= 0.0) continue;
    c2 = std::min(c2, (1.0 - phi[k] * phi[k]) / lp);
  }
  const double c = std::sqrt(std::max(c2, 0.0));
  for (auto& w : bank)
    for (double& v : w.hat) v *= c;
}

std::size_t mirror_index(long long i, std::size_t n) {
  if (n == 1) return 0;
  const long long period = 2 * static_cast<long long>(n) - 2;
  long long m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<long long>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

}  // namespace

MorletFilterBank morlet_filterbank(int J, int Q, std::size_t len, Boundary boundary) {
  if (J < 1 || J > 30) throw std::invalid_argument("morlet_filterbank: J must be in [1, 30]");
  if (Q < 1 || Q > 32) throw std::invalid_argument("morlet_filterbank: Q must be in [1, 32]");
  if ((std::size_t{1} << J) > len)
    throw std::invalid_argument("morlet_filterbank: 2^J = " + std::to_string(1 << J) +
                                " exceeds signal length " + std::to_string(len));
  MorletFilterBank b;
  b.J = J;
  b.Q = Q;
  b.boundary = boundary;
  b.signal_len = len;
  if (boundary == Boundary::Periodic) {
    b.padded_len = len;
    b.pad_left = 0;
  } else {
    const std::size_t pad = std::min<std::size_t>(len - 1, std::size_t{1} << (J + 3));
    b.padded_len = next_pow2(len + 2 * pad);
    b.pad_left = (b.padded_len - len) / 2;
  }
  const std::size_t p = b.padded_len;
  b.sigma_low = kSigma0 / std::pow(2.0, J);

  b.phi_hat.resize(p);
  const double phi0 = periodized_gauss(0.0, 0.0, b.sigma_low);
  for (std::size_t k = 0; k < p; ++k)
    b.phi_hat[k] = periodized_gauss(double(k) / double(p), 0.0, b.sigma_low) / phi0;

  for (auto [xi, sigma] : wavelet_params(Q, b.sigma_low))
    b.psi1.push_back({xi, sigma, morlet_hat(p, xi, sigma)});
  for (auto [xi, sigma] : wavelet_params(1, b.sigma_low))
    b.psi2.push_back({xi, sigma, morlet_hat(p, xi, sigma)});
  normalize_order(b.psi1, b.phi_hat);
  normalize_order(b.psi2, b.phi_hat);

  const double fwhm_factor = 2.0 * std::sqrt(2.0 * std::log(2.0));
  for (std::size_t n1 = 0; n1 < b.psi1.size(); ++n1)
    for (std::size_t n2 = 0; n2 < b.psi2.size(); ++n2)
      if (b.psi2[n2].xi < fwhm_factor * b.psi1[n1].sigma)
        b.pairs.emplace_back(static_cast<int>(n1), static_cast<int>(n2));
  return b;
}

std::shared_ptr<const MorletFilterBank> cached_filterbank(int J, int Q, std::size_t len) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, std::size_t>, std::shared_ptr<const MorletFilterBank>>
      cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{J, Q, len}];
  if (!slot) slot = std::make_shared<const MorletFilterBank>(morlet_filterbank(J, Q, len));
  return slot;
}

std::size_t scattering_rows(const MorletFilterBank& bank, int order) {
  if (order < 0 || order > 2)
    throw std::invalid_argument("scattering order must be 0, 1 or 2");
  std::size_t rows = 1;
  if (order >= 1) rows += bank.psi1.size();
  if (order >= 2) rows += bank.pairs.size();
  return rows;
}

std::vector<std::string> scattering_path_names(const MorletFilterBank& bank, int order) {
  std::vector<std::string> names{"S0"};
  if (order >= 1)
    for (std::size_t i = 0; i < bank.psi1.size(); ++i)
      names.push_back("S1[" + std::to_string(i) + "]");
  if (order >= 2)
    for (auto [a, c] : bank.pairs)
      names.push_back("S2[" + std::to_string(a) + "," + std::to_string(c) + "]");
  return names;
}

Matrix scatter(std::span<const double> x, const MorletFilterBank& bank, int order) {
  if (x.size() != bank.signal_len)
    throw std::invalid_argument("scatter: signal length " + std::to_string(x.size()) +
                                " does not match filter bank length " +
                                std::to_string(bank.signal_len));
  const std::size_t rows = scattering_rows(bank, order);
  const std::size_t p = bank.padded_len;
  const std::size_t step = std::size_t{1} << bank.J;
  const std::size_t cols = x.size() / step;
  const Fft& plan = fft_plan(p);
  Matrix out(rows, cols);

  std::vector<cplx> xhat(p);
  for (std::size_t i = 0; i < p; ++i)
    xhat[i] = x[mirror_index(static_cast<long long>(i) - static_cast<long long>(bank.pad_left),
                             x.size())];
  plan.forward(xhat);

  std::vector<cplx> work(p);
  // Low-pass a spectrum and write the subsampled real part into row r.
  auto average_into = [&](const std::vector<cplx>& spec, std::size_t r) {
    for (std::size_t k = 0; k < p; ++k) work[k] = spec[k] * bank.phi_hat[k];
    plan.inverse(work);
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = work[bank.pad_left + c * step].real();
  };
  // |ifft(spec * filter)| transformed back to the Fourier domain.
  auto modulus_spectrum = [&](const std::vector<cplx>& spec, const std::vector<double>& filt,
                              std::vector<cplx>& dst) {
    for (std::size_t k = 0; k < p; ++k) dst[k] = spec[k] * filt[k];
    plan.inverse(dst);
    for (auto& v : dst) v = std::abs(v);
    plan.forward(dst);
  };

  average_into(xhat, 0);
  if (order == 0) return out;

  std::vector<cplx> u1(p), u2(p);
  std::size_t row2 = 1 + bank.psi1.size();
  std::size_t pair_idx = 0;
  for (std::size_t n1 = 0; n1 < bank.psi1.size(); ++n1) {
    modulus_spectrum(xhat, bank.psi1[n1].hat, u1);
    average_into(u1, 1 + n1);
    if (order < 2) continue;
    // pairs are sorted by n1.
    while (pair_idx < bank.pairs.size() &&
           bank.pairs[pair_idx].first == static_cast<int>(n1)) {
      modulus_spectrum(u1, bank.psi2[bank.pairs[pair_idx].second].hat, u2);
      average_into(u2, row2++);
      ++pair_idx;
    }
  }
  return out;
}

FeatureMap wst(std::span<const double> x, const FeatureParams& params) {
  if (params.wst_J < 1 || x.size() < (std::size_t{1} << std::min(params.wst_J, 30)))
    throw std::invalid_argument("wst: signal of " + std::to_string(x.size()) +
                                " samples is shorter than the averaging scale 2^" +
                                std::to_string(params.wst_J));
  auto bank = cached_filterbank(params.wst_J, params.wst_Q, x.size());
  return {FeatureKind::WST, scatter(x, *bank, params.wst_order), params};
}

void log_scale(Matrix& m, double floor) {
  for (double& v : m.data) v = std::log(std::max(std::abs(v), floor));
}

}  // namespace pcg::features
