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

#pragma once

#include <complex>
#include <vector>

#include "avifront/fft.h"
#include "avifront/types.h"

namespace avifront {

/// One 2-D Gabor filter: a plane wave with spectro-temporal modulation
/// frequency F at orientation gamma, windowed by an axis-aligned Gaussian.
struct Strf2dFilterParams {
  double F = 0.0;        // cycles per grid unit
  double gamma = 0.0;    // radians, interpreted modulo pi
  double sigma_t = 1.0;  // frames
  double sigma_f = 1.0;  // mel bins
};

/// One 1-D complex Gabor wavelet.
struct Gabor1dParams {
  double eta = 0.0;       // normalized center frequency, in (0, 0.5)
  double sigma_bw = 1.0;  // envelope width, samples
};

struct GaussianLowpassParams {
  double sigma_lp = 1.0;  // impulse response width, samples
};

/// Complex 2-D grid, row-major, used for Gabor kernels.
struct CGrid2 {
  int rows = 0;
  int cols = 0;
  std::vector<cplx> v;

  CGrid2() = default;
  CGrid2(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c) {}

  cplx& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  cplx at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
};

/// g(t,f) = exp(j*2*pi*F*(t*cos(gamma) + f*sin(gamma)))
///          * exp(-t^2/(2*sigma_t^2) - f^2/(2*sigma_f^2)) / (2*pi*sigma_t*sigma_f)
/// evaluated on integer offsets t in [-half_t, half_t], f in [-half_f, half_f].
CGrid2 gabor_kernel_2d(const Strf2dFilterParams& p, int half_t, int half_f);

/// phi(t) = exp(j*2*pi*eta*t) * exp(-t^2/(2*sigma_bw^2)) / (sqrt(2*pi)*sigma_bw)
/// on integer t in [-half_len, half_len].
std::vector<cplx> gabor_wavelet_1d(const Gabor1dParams& p, int half_len);

/// Phi(t) = exp(-t^2/(2*sigma_lp^2)) / (sqrt(2*pi)*sigma_lp) on integer
/// t in [-half_len, half_len].
std::vector<double> gaussian_lowpass_1d(const GaussianLowpassParams& p,
                                        int half_len);

/// Gabor bank approximating a mel filterbank: eta_n at the mel-spaced center
/// frequencies and sigma_bw matched so the Gabor bandwidth follows the mel
/// triangle's full width at half maximum,
/// sigma_bw = sqrt(2*ln 2) / (2*pi*fwhm_normalized).
std::vector<Gabor1dParams> init_mel_gabor_bank(int n_filters, double f_min_hz,
                                               double f_max_hz,
                                               int sample_rate_hz,
                                               int half_len);

}  // namespace avifront
