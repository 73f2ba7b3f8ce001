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

#include <vector>

#include "avifront/types.h"

namespace avifront {

/// HTK mel scale: m = 2595 * log10(1 + f / 700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// |DFT(frame)|^2 for bins 0..N/2. N must be a power of two and the frame is
/// expected to be windowed already.
std::vector<double> dft_power(const std::vector<double>& frame);

/// Hann-windowed power spectrogram. The window length is
/// floor(win_len_s * rate) samples, hop = round(win * (1 - overlap_frac)),
/// and each frame is zero-padded to the next power of two before the DFT.
PowerSpectrogram power_spectrogram(const Waveform& w, double win_len_s,
                                   double overlap_frac);

/// Triangular filters with centers equally spaced on the mel scale between
/// f_min and f_max. Each row is scaled so its peak sampled weight is 1.
MelFilterbank build_mel_filterbank(int n_mels, double f_min_hz, double f_max_hz,
                                   int n_bins, double bin_hz);

/// Mel-spaced center frequencies: the interior points of an (n + 2)-point
/// equal-mel grid spanning [f_min, f_max].
std::vector<double> mel_center_freqs(int n, double f_min_hz, double f_max_hz);

MelSpectrogram apply_mel(const PowerSpectrogram& ps, const MelFilterbank& fb);

/// out[t,m] = ln(ms[t,m] + floor_eps).
MelSpectrogram log_compress(const MelSpectrogram& ms, double floor_eps);

}  // namespace avifront
