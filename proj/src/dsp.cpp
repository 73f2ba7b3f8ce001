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

#include "avifront/dsp.h"

#include <algorithm>
#include <cmath>

#include "avifront/fft.h"

namespace avifront {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<double> dft_power(const std::vector<double>& frame) {
  const size_t n = frame.size();
  if (!is_power_of_two(n)) {
    throw ConfigError("dft_power: frame length must be a power of two, got " +
                      std::to_string(n));
  }
  std::vector<cplx> buf(n);
  for (size_t i = 0; i < n; ++i) buf[i] = cplx(frame[i], 0.0);
  fft_inplace(buf, false);
  std::vector<double> power(n / 2 + 1);
  for (size_t b = 0; b <= n / 2; ++b) power[b] = std::norm(buf[b]);
  return power;
}

PowerSpectrogram power_spectrogram(const Waveform& w, double win_len_s,
                                   double overlap_frac) {
  if (w.sample_rate_hz <= 0) {
    throw ConfigError("power_spectrogram: sample rate must be positive");
  }
  if (overlap_frac < 0.0 || overlap_frac >= 1.0) {
    throw ConfigError("power_spectrogram: overlap must be in [0, 1), got " +
                      std::to_string(overlap_frac));
  }
  const int win_len = static_cast<int>(win_len_s * w.sample_rate_hz);
  if (win_len < 2) {
    throw ConfigError("power_spectrogram: window shorter than 2 samples");
  }
  if (w.samples.size() < static_cast<size_t>(win_len)) {
    throw DataError("power_spectrogram: input too short (" +
                    std::to_string(w.samples.size()) + " samples, window " +
                    std::to_string(win_len) + ")");
  }
  const int hop = std::max<int>(
      1, static_cast<int>(std::llround(win_len * (1.0 - overlap_frac))));
  const size_t fft_size = next_power_of_two(static_cast<size_t>(win_len));
  const int n_bins = static_cast<int>(fft_size / 2 + 1);
  const int n_frames =
      static_cast<int>((w.samples.size() - win_len) / hop) + 1;

  std::vector<double> window(win_len);
  for (int i = 0; i < win_len; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / win_len);
  }

  PowerSpectrogram ps;
  ps.values = Grid2(n_frames, n_bins);
  ps.bin_hz = static_cast<double>(w.sample_rate_hz) / fft_size;
  ps.hop_s = static_cast<double>(hop) / w.sample_rate_hz;

  std::vector<double> frame(fft_size);
  for (int t = 0; t < n_frames; ++t) {
    const size_t start = static_cast<size_t>(t) * hop;
    std::fill(frame.begin(), frame.end(), 0.0);
    for (int i = 0; i < win_len; ++i) {
      frame[i] = w.samples[start + i] * window[i];
    }
    const std::vector<double> power = dft_power(frame);
    for (int b = 0; b < n_bins; ++b) ps.values.at(t, b) = power[b];
  }
  return ps;
}

std::vector<double> mel_center_freqs(int n, double f_min_hz, double f_max_hz) {
  const double mel_lo = hz_to_mel(f_min_hz);
  const double mel_hi = hz_to_mel(f_max_hz);
  std::vector<double> centers(n);
  for (int m = 0; m < n; ++m) {
    const double mel = mel_lo + (mel_hi - mel_lo) * (m + 1) / (n + 1);
    centers[m] = mel_to_hz(mel);
  }
  return centers;
}

MelFilterbank build_mel_filterbank(int n_mels, double f_min_hz, double f_max_hz,
                                   int n_bins, double bin_hz) {
  if (n_mels < 1) throw ConfigError("mel filterbank: n_mels must be >= 1");
  if (!(f_min_hz > 0.0) || !(f_min_hz < f_max_hz)) {
    throw ConfigError("mel filterbank: need 0 < f_min < f_max");
  }
  const double nyquist = (n_bins - 1) * bin_hz;
  if (f_max_hz > nyquist) {
    throw ConfigError("mel filterbank: f_max " + std::to_string(f_max_hz) +
                      " Hz exceeds Nyquist " + std::to_string(nyquist) + " Hz");
  }

  // Edges on an (n_mels + 2)-point equal-mel grid; centers are the interior.
  const double mel_lo = hz_to_mel(f_min_hz);
  const double mel_hi = hz_to_mel(f_max_hz);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));
  }

  MelFilterbank fb;
  fb.weights = Grid2(n_mels, n_bins);
  fb.center_freqs_hz.assign(edges.begin() + 1, edges.end() - 1);
  for (int m = 0; m < n_mels; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    double peak = 0.0;
    for (int b = 0; b < n_bins; ++b) {
      const double f = b * bin_hz;
      double weight = 0.0;
      if (f > left && f < center) {
        weight = (f - left) / (center - left);
      } else if (f >= center && f < right) {
        weight = (right - f) / (right - center);
      }
      fb.weights.at(m, b) = weight;
      peak = std::max(peak, weight);
    }
    if (peak > 0.0) {
      for (int b = 0; b < n_bins; ++b) fb.weights.at(m, b) /= peak;
    }
  }
  return fb;
}

MelSpectrogram apply_mel(const PowerSpectrogram& ps, const MelFilterbank& fb) {
  if (fb.n_bins() != ps.n_bins()) {
    throw ConfigError("apply_mel: filterbank has " +
                      std::to_string(fb.n_bins()) + " bins, spectrogram has " +
                      std::to_string(ps.n_bins()));
  }
  MelSpectrogram ms;
  ms.values = Grid2(ps.n_frames(), fb.n_mels());
  ms.hop_s = ps.hop_s;
  ms.center_freqs_hz = fb.center_freqs_hz;
  for (int t = 0; t < ps.n_frames(); ++t) {
    for (int m = 0; m < fb.n_mels(); ++m) {
      double acc = 0.0;
      for (int b = 0; b < ps.n_bins(); ++b) {
        acc += fb.weights.at(m, b) * ps.values.at(t, b);
      }
      ms.values.at(t, m) = acc;
    }
  }
  return ms;
}

MelSpectrogram log_compress(const MelSpectrogram& ms, double floor_eps) {
  if (!(floor_eps > 0.0)) {
    throw ConfigError("log_compress: floor_eps must be positive");
  }
  MelSpectrogram out = ms;
  for (double& x : out.values.v) x = std::log(x + floor_eps);
  return out;
}

}  // namespace avifront
