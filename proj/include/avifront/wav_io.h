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

#include <string>

#include "avifront/types.h"

namespace avifront {

/// Decodes a RIFF/WAVE file (PCM16 or IEEE float32). Multi-channel audio is
/// averaged down to mono; PCM16 samples are scaled by 1/32768. Throws
/// DataError with the offending path on malformed or unsupported input.
Waveform load_wav(const std::string& path);

/// Writes mono PCM16; samples are scaled by 32768 and clamped to int16.
void write_wav_pcm16(const std::string& path, const Waveform& waveform);

/// Writes mono IEEE float32.
void write_wav_float32(const std::string& path, const Waveform& waveform);

struct PrepareInfo {
  bool resampled = false;
  int source_rate_hz = 0;
};

/// Linear resampling to target_rate_hz (if needed), then zero-padding or
/// truncation to exactly round(duration_s * target_rate_hz) samples.
Waveform prepare_clip(const Waveform& in, int target_rate_hz,
                      double duration_s, PrepareInfo* info = nullptr);

/// load_wav followed by prepare_clip; logs a stderr warning on resample.
Waveform load_clip(const std::string& path, int target_rate_hz,
                   double duration_s, PrepareInfo* info = nullptr);

struct NormalizeInfo {
  bool silent = false;
  double scale = 1.0;
};

/// Scales so the sample of largest magnitude sits at target_dbfs (relative to
/// full scale 1.0). Silent input is returned unchanged with info->silent set.
Waveform normalize_dbfs(const Waveform& in, double target_dbfs,
                        NormalizeInfo* info = nullptr);

}  // namespace avifront
