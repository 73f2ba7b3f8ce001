// Copyright 2026 The Avifront Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "avifront/fft.h"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace avifront {
namespace {

// Twiddles for one transform size: w[j] = exp(-2*pi*i*j/n), j in [0, n/2).
// Computed with cos/sin per index rather than by recurrence so rounding does
// not accumulate with the transform size.
struct Plan {
  std::vector<cplx> twiddles;
  std::vector<size_t> bit_reversal;
};

const Plan& plan_for(size_t n) {
  thread_local std::unordered_map<size_t, Plan> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  Plan plan;
  plan.twiddles.resize(n / 2);
  for (size_t j = 0; j < n / 2; ++j) {
    const double angle = -2.0 * M_PI * static_cast<double>(j) / n;
    plan.twiddles[j] = cplx(std::cos(angle), std::sin(angle));
  }
  plan.bit_reversal.resize(n);
  size_t bits = 0;
  while ((size_t{1} << bits) < n) ++bits;
  for (size_t i = 0; i < n; ++i) {
    size_t r = 0;
    for (size_t b = 0; b < bits; ++b) {
      r = (r << 1) | ((i >> b) & 1);
    }
    plan.bit_reversal[i] = r;
  }
  return cache.emplace(n, std::move(plan)).first->second;
}

}  // namespace

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

size_t next_power_of_two(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::vector<cplx>& data, bool inverse) {
  const size_t n = data.size();
  if (n == 0) return;
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("fft: size must be a power of two, got " +
                                std::to_string(n));
  }
  if (n == 1) return;

  const Plan& plan = plan_for(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t r = plan.bit_reversal[i];
    if (i < r) std::swap(data[i], data[r]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const size_t half = len / 2;
    const size_t stride = n / len;
    for (size_t start = 0; start < n; start += len) {
      for (size_t j = 0; j < half; ++j) {
        cplx w = plan.twiddles[j * stride];
        if (inverse) w = std::conj(w);
        const cplx odd = data[start + j + half] * w;
        const cplx even = data[start + j];
        data[start + j] = even + odd;
        data[start + j + half] = even - odd;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : data) x *= scale;
  }
}

std::vector<cplx> fft(const std::vector<cplx>& data) {
  std::vector<cplx> out = data;
  fft_inplace(out, false);
  return out;
}

std::vector<cplx> ifft(const std::vector<cplx>& data) {
  std::vector<cplx> out = data;
  fft_inplace(out, true);
  return out;
}

std::vector<cplx> fft_conv_full(const std::vector<cplx>& a,
                                const std::vector<cplx>& b) {
  if (a.empty() || b.empty()) return {};
  const size_t out_len = a.size() + b.size() - 1;
  const size_t n = next_power_of_two(out_len);
  std::vector<cplx> fa(n), fb(n);
  std::copy(a.begin(), a.end(), fa.begin());
  std::copy(b.begin(), b.end(), fb.begin());
  fft_inplace(fa, false);
  fft_inplace(fb, false);
  for (size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft_inplace(fa, true);
  fa.resize(out_len);
  return fa;
}

}  // namespace avifront
