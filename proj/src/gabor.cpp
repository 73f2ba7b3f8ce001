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

#include "avifront/gabor.h"

#include <cmath>

#include "avifront/dsp.h"

namespace avifront {

CGrid2 gabor_kernel_2d(const Strf2dFilterParams& p, int half_t, int half_f) {
  if (half_t < 1 || half_f < 1) {
    throw ConfigError("gabor_kernel_2d: half sizes must be >= 1");
  }
  if (!(p.sigma_t > 0.0) || !(p.sigma_f > 0.0)) {
    throw ConfigError("gabor_kernel_2d: sigmas must be positive");
  }
  CGrid2 g(2 * half_t + 1, 2 * half_f + 1);
  const double norm = 1.0 / (2.0 * M_PI * p.sigma_t * p.sigma_f);
  const double cg = std::cos(p.gamma);
  const double sg = std::sin(p.gamma);
  for (int t = -half_t; t <= half_t; ++t) {
    for (int f = -half_f; f <= half_f; ++f) {
      const double w = norm * std::exp(-t * t / (2.0 * p.sigma_t * p.sigma_t) -
                                       f * f / (2.0 * p.sigma_f * p.sigma_f));
      const double phase = 2.0 * M_PI * p.F * (t * cg + f * sg);
      g.at(t + half_t, f + half_f) =
          cplx(w * std::cos(phase), w * std::sin(phase));
    }
  }
  return g;
}

std::vector<cplx> gabor_wavelet_1d(const Gabor1dParams& p, int half_len) {
  if (half_len < 1) throw ConfigError("gabor_wavelet_1d: half_len must be >= 1");
  if (!(p.sigma_bw > 0.0)) {
    throw ConfigError("gabor_wavelet_1d: sigma_bw must be positive");
  }
  std::vector<cplx> phi(2 * half_len + 1);
  const double norm = 1.0 / (std::sqrt(2.0 * M_PI) * p.sigma_bw);
  for (int t = -half_len; t <= half_len; ++t) {
    const double env =
        norm * std::exp(-t * t / (2.0 * p.sigma_bw * p.sigma_bw));
    const double phase = 2.0 * M_PI * p.eta * t;
    phi[t + half_len] = cplx(env * std::cos(phase), env * std::sin(phase));
  }
  return phi;
}

std::vector<double> gaussian_lowpass_1d(const GaussianLowpassParams& p,
                                        int half_len) {
  if (half_len < 1) {
    throw ConfigError("gaussian_lowpass_1d: half_len must be >= 1");
  }
  if (!(p.sigma_lp > 0.0)) {
    throw ConfigError("gaussian_lowpass_1d: sigma_lp must be positive");
  }
  std::vector<double> kernel(2 * half_len + 1);
  const double norm = 1.0 / (std::sqrt(2.0 * M_PI) * p.sigma_lp);
  for (int t = -half_len; t <= half_len; ++t) {
    kernel[t + half_len] =
        norm * std::exp(-t * t / (2.0 * p.sigma_lp * p.sigma_lp));
  }
  return kernel;
}

std::vector<Gabor1dParams> init_mel_gabor_bank(int n_filters, double f_min_hz,
                                               double f_max_hz,
                                               int sample_rate_hz,
                                               int half_len) {
  if (n_filters < 1) {
    throw ConfigError("init_mel_gabor_bank: n_filters must be >= 1");
  }
  if (half_len < 1) {
    throw ConfigError("init_mel_gabor_bank: half_len must be >= 1");
  }
  if (f_max_hz > 0.5 * sample_rate_hz) {
    throw ConfigError("init_mel_gabor_bank: f_max exceeds Nyquist");
  }
  const double mel_lo = hz_to_mel(f_min_hz);
  const double mel_hi = hz_to_mel(f_max_hz);
  std::vector<Gabor1dParams> bank(n_filters);
  for (int n = 0; n < n_filters; ++n) {
    // Adjacent points of the (n_filters + 2)-point mel grid give the mel
    // triangle around center n; its FWHM is half the left-to-right span.
    const double step = (mel_hi - mel_lo) / (n_filters + 1);
    const double left = mel_to_hz(mel_lo + step * n);
    const double center = mel_to_hz(mel_lo + step * (n + 1));
    const double right = mel_to_hz(mel_lo + step * (n + 2));
    const double fwhm_norm = 0.5 * (right - left) / sample_rate_hz;
    bank[n].eta = center / sample_rate_hz;
    bank[n].sigma_bw = std::sqrt(2.0 * std::log(2.0)) / (2.0 * M_PI * fwhm_norm);
  }
  return bank;
}

}  // namespace avifront
