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

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "avifront/types.h"

namespace avifront {

struct ManifestEntry {
  std::string item_id;
  std::string dataset_id;
  int has_bird = 0;
};

/// Parses a manifest CSV with at least the columns itemid and hasbird (any
/// order, extra columns ignored). Errors carry 1-based line numbers.
std::vector<ManifestEntry> parse_manifest(const std::string& csv_text,
                                          const std::string& dataset_id);

std::vector<ManifestEntry> load_manifest_file(const std::string& path,
                                              const std::string& dataset_id);

enum class Split { Train, Val, Test };

std::string to_string(Split split);
Split split_from_string(const std::string& name);

struct SplitRatios {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
};

struct SplitAssignment {
  std::unordered_map<std::string, Split> by_key;

  static std::string key(const std::string& dataset_id,
                         const std::string& item_id) {
    return dataset_id + "/" + item_id;
  }
  Split of(const ManifestEntry& entry) const;
};

/// Stratified split over (dataset, label) cells. Each cell is shuffled with a
/// seed derived from the global seed and the cell key, then cut at
/// floor(n * ratio) per split; leftover items go to train.
SplitAssignment stratified_split(const std::vector<ManifestEntry>& entries,
                                 const SplitRatios& ratios, uint64_t seed);

std::string split_csv(const std::vector<ManifestEntry>& entries,
                      const SplitAssignment& assignment);
SplitAssignment parse_split_csv(const std::string& csv_text);

void write_split_file(const std::string& path,
                      const std::vector<ManifestEntry>& entries,
                      const SplitAssignment& assignment);
SplitAssignment load_split_file(const std::string& path);

struct SynthConfig {
  int n_clips = 200;
  int sample_rate_hz = 22050;
  double clip_s = 0.5;
  double snr_db_lo = 10.0;
  double snr_db_hi = 30.0;
  uint64_t seed = 0;
};

struct SynthClip {
  std::string item_id;
  int label = 0;
  double snr_db = 0.0;
  Waveform waveform;
};

/// Deterministic synthetic corpus: even indices are positives carrying 2-8 kHz
/// chirp sequences over pink+white noise at the drawn SNR; odd indices are
/// negatives, half of which carry a sub-400 Hz tonal distractor. Peaks are
/// normalized to -2 dBFS.
std::vector<SynthClip> synth_dataset(const SynthConfig& config);

}  // namespace avifront
