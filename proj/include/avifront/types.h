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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace avifront {

/// Mono audio buffer. Samples are dimensionless amplitudes, nominally in
/// [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 0;

  double duration_s() const {
    return sample_rate_hz > 0
               ? static_cast<double>(samples.size()) / sample_rate_hz
               : 0.0;
  }
};

/// Dense row-major 2-D grid of doubles.
struct Grid2 {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Grid2() = default;
  Grid2(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {}

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  size_t size() const { return v.size(); }
  bool same_shape(const Grid2& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

/// Dense channel-major 3-D grid: index order [channel][row][col].
struct Grid3 {
  int channels = 0;
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Grid3() = default;
  Grid3(int ch, int r, int c, double fill = 0.0)
      : channels(ch),
        rows(r),
        cols(c),
        v(static_cast<size_t>(ch) * r * c, fill) {}

  double& at(int ch, int r, int c) {
    return v[(static_cast<size_t>(ch) * rows + r) * cols + c];
  }
  double at(int ch, int r, int c) const {
    return v[(static_cast<size_t>(ch) * rows + r) * cols + c];
  }
  size_t size() const { return v.size(); }
  bool same_shape(const Grid3& o) const {
    return channels == o.channels && rows == o.rows && cols == o.cols;
  }
};

/// |DFT|^2 frames: values is [n_frames x n_bins], n_bins = fft_size/2 + 1.
struct PowerSpectrogram {
  Grid2 values;
  double bin_hz = 0.0;
  double hop_s = 0.0;

  int n_frames() const { return values.rows; }
  int n_bins() const { return values.cols; }
};

/// Triangular mel filterbank, rows peak-normalized to 1.
struct MelFilterbank {
  Grid2 weights;  // [n_mels x n_bins]
  std::vector<double> center_freqs_hz;

  int n_mels() const { return weights.rows; }
  int n_bins() const { return weights.cols; }
};

/// Mel-filtered energies: values is [n_frames x n_mels].
struct MelSpectrogram {
  Grid2 values;
  double hop_s = 0.0;
  std::vector<double> center_freqs_hz;

  int n_frames() const { return values.rows; }
  int n_mels() const { return values.cols; }
};

/// Frontend output. channels = 1 except for the 2-D Gabor frontend where
/// each filter occupies a channel.
struct FeatureMap {
  Grid3 values;  // [channels x n_frames x n_bands]
  double hop_s = 0.0;

  int channels() const { return values.channels; }
  int n_frames() const { return values.rows; }
  int n_bands() const { return values.cols; }
};

/// Thrown on invalid configuration or precondition violations (CLI exit 1).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown on data/runtime failures (CLI exit 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace avifront
