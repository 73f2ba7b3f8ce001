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

#include "avifront/dataset.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "avifront/rng.h"
#include "avifront/wav_io.h"

namespace avifront {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
  size_t begin = 0;
  size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) {
    --end;
  }
  return s.substr(begin, end - begin);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::stringstream ss(text);
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void manifest_error(size_t line_no, const std::string& what) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "manifest line %zu: ", line_no);
  throw DataError(buf + what);
}

}  // namespace

std::vector<ManifestEntry> parse_manifest(const std::string& csv_text,
                                          const std::string& dataset_id) {
  const std::vector<std::string> lines = split_lines(csv_text);
  if (lines.empty()) throw DataError("manifest is empty");

  const std::vector<std::string> header = split_fields(lines[0]);
  int itemid_col = -1;
  int hasbird_col = -1;
  for (size_t c = 0; c < header.size(); ++c) {
    const std::string name = lower(header[c]);
    if (name == "itemid") itemid_col = static_cast<int>(c);
    if (name == "hasbird") hasbird_col = static_cast<int>(c);
  }
  if (itemid_col < 0) throw DataError("manifest is missing an itemid column");
  if (hasbird_col < 0) throw DataError("manifest is missing a hasbird column");

  std::vector<ManifestEntry> entries;
  std::unordered_set<std::string> seen;
  for (size_t i = 1; i < lines.size(); ++i) {
    const size_t line_no = i + 1;
    if (trim(lines[i]).empty()) continue;
    const std::vector<std::string> fields = split_fields(lines[i]);
    const size_t needed =
        static_cast<size_t>(std::max(itemid_col, hasbird_col)) + 1;
    if (fields.size() < needed) {
      manifest_error(line_no, "expected at least " + std::to_string(needed) +
                                  " fields, got " +
                                  std::to_string(fields.size()));
    }
    ManifestEntry entry;
    entry.item_id = fields[itemid_col];
    entry.dataset_id = dataset_id;
    if (entry.item_id.empty()) manifest_error(line_no, "empty itemid");
    if (!seen.insert(entry.item_id).second) {
      manifest_error(line_no, "duplicate itemid '" + entry.item_id + "'");
    }
    const std::string& label = fields[hasbird_col];
    if (label == "0") {
      entry.has_bird = 0;
    } else if (label == "1") {
      entry.has_bird = 1;
    } else {
      manifest_error(line_no, "hasbird must be 0 or 1, got '" + label + "'");
    }
    entries.push_back(entry);
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest_file(const std::string& path,
                                              const std::string& dataset_id) {
  try {
    return parse_manifest(read_text_file(path), dataset_id);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string to_string(Split split) {
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::Test:
      return "test";
  }
  return "train";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw DataError("unknown split name: " + name);
}

Split SplitAssignment::of(const ManifestEntry& entry) const {
  const auto it = by_key.find(key(entry.dataset_id, entry.item_id));
  if (it == by_key.end()) {
    throw DataError("no split assignment for " +
                    key(entry.dataset_id, entry.item_id));
  }
  return it->second;
}

SplitAssignment stratified_split(const std::vector<ManifestEntry>& entries,
                                 const SplitRatios& ratios, uint64_t seed) {
  if (ratios.train < 0.0 || ratios.val < 0.0 || ratios.test < 0.0 ||
      std::fabs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be nonnegative and sum to 1");
  }
  // Cells keyed by (dataset, label); std::map keeps the cell order (and thus
  // the per-cell seeds) independent of manifest order.
  std::map<std::string, std::vector<size_t>> cells;
  for (size_t i = 0; i < entries.size(); ++i) {
    const std::string cell_key =
        entries[i].dataset_id + "#" + std::to_string(entries[i].has_bird);
    cells[cell_key].push_back(i);
  }

  SplitAssignment assignment;
  for (auto& [cell_key, indices] : cells) {
    Rng rng(seed ^ Rng::hash_string(cell_key));
    rng.shuffle(indices);
    const size_t n = indices.size();
    const size_t n_train = static_cast<size_t>(
        std::floor(static_cast<double>(n) * ratios.train));
    const size_t n_val =
        static_cast<size_t>(std::floor(static_cast<double>(n) * ratios.val));
    const size_t n_test =
        static_cast<size_t>(std::floor(static_cast<double>(n) * ratios.test));
    const size_t leftover = n - n_train - n_val - n_test;
    size_t pos = 0;
    for (size_t c = 0; c < n_train + leftover; ++c, ++pos) {
      const auto& e = entries[indices[pos]];
      assignment.by_key[SplitAssignment::key(e.dataset_id, e.item_id)] =
          Split::Train;
    }
    for (size_t c = 0; c < n_val; ++c, ++pos) {
      const auto& e = entries[indices[pos]];
      assignment.by_key[SplitAssignment::key(e.dataset_id, e.item_id)] =
          Split::Val;
    }
    for (size_t c = 0; c < n_test; ++c, ++pos) {
      const auto& e = entries[indices[pos]];
      assignment.by_key[SplitAssignment::key(e.dataset_id, e.item_id)] =
          Split::Test;
    }
  }
  return assignment;
}

std::string split_csv(const std::vector<ManifestEntry>& entries,
                      const SplitAssignment& assignment) {
  std::ostringstream out;
  out << "itemid,dataset,split\n";
  for (const auto& entry : entries) {
    out << entry.item_id << "," << entry.dataset_id << ","
        << to_string(assignment.of(entry)) << "\n";
  }
  return out.str();
}

SplitAssignment parse_split_csv(const std::string& csv_text) {
  const std::vector<std::string> lines = split_lines(csv_text);
  if (lines.empty()) throw DataError("split file is empty");
  const std::vector<std::string> header = split_fields(lines[0]);
  if (header.size() < 3 || lower(header[0]) != "itemid" ||
      lower(header[1]) != "dataset" || lower(header[2]) != "split") {
    throw DataError("split file must start with itemid,dataset,split");
  }
  SplitAssignment assignment;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::vector<std::string> fields = split_fields(lines[i]);
    if (fields.size() < 3) {
      throw DataError("split file line " + std::to_string(i + 1) +
                      ": expected 3 fields");
    }
    assignment.by_key[SplitAssignment::key(fields[1], fields[0])] =
        split_from_string(fields[2]);
  }
  return assignment;
}

void write_split_file(const std::string& path,
                      const std::vector<ManifestEntry>& entries,
                      const SplitAssignment& assignment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out << split_csv(entries, assignment);
  if (!out) throw DataError("failed writing file: " + path);
}

SplitAssignment load_split_file(const std::string& path) {
  return parse_split_csv(read_text_file(path));
}

namespace {

// Paul Kellet's economy pink noise filter over white Gaussian input.
struct PinkNoise {
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;

  double next(double white) {
    b0 = 0.99886 * b0 + white * 0.0555179;
    b1 = 0.99332 * b1 + white * 0.0750759;
    b2 = 0.96900 * b2 + white * 0.1538520;
    b3 = 0.86650 * b3 + white * 0.3104856;
    b4 = 0.55000 * b4 + white * 0.5329522;
    b5 = -0.7616 * b5 - white * 0.0168980;
    const double pink = b0 + b1 + b2 + b3 + b4 + b5 + b6 + white * 0.5362;
    b6 = white * 0.115926;
    return pink * 0.11;
  }
};

double rms_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc / static_cast<double>(v.size()));
}

void add_chirp(std::vector<double>* signal, int sample_rate_hz, double t0,
               double duration_s, double f0, double f1, double phase0) {
  const int start = static_cast<int>(std::llround(t0 * sample_rate_hz));
  const int n = std::max(2, static_cast<int>(std::llround(duration_s *
                                                          sample_rate_hz)));
  for (int k = 0; k < n; ++k) {
    const int idx = start + k;
    if (idx < 0 || idx >= static_cast<int>(signal->size())) continue;
    const double t = static_cast<double>(k) / sample_rate_hz;
    const double phase =
        2.0 * kPi * (f0 * t + 0.5 * (f1 - f0) * t * t / duration_s);
    const double window = 0.5 - 0.5 * std::cos(2.0 * kPi * k / (n - 1));
    (*signal)[idx] += window * std::sin(phase + phase0);
  }
}

}  // namespace

std::vector<SynthClip> synth_dataset(const SynthConfig& config) {
  if (config.n_clips < 1) throw ConfigError("synth: n_clips must be >= 1");
  if (config.sample_rate_hz <= 0) {
    throw ConfigError("synth: sample rate must be > 0");
  }
  if (config.clip_s <= 0.0) throw ConfigError("synth: clip_s must be > 0");
  if (config.snr_db_hi < config.snr_db_lo) {
    throw ConfigError("synth: snr_db_hi must be >= snr_db_lo");
  }

  const int n_samples = std::max(
      16, static_cast<int>(std::llround(config.clip_s *
                                        config.sample_rate_hz)));
  Rng master(config.seed);
  std::vector<SynthClip> clips;
  clips.reserve(config.n_clips);
  for (int i = 0; i < config.n_clips; ++i) {
    Rng rng = master.fork(static_cast<uint64_t>(i) + 1);
    SynthClip clip;
    char name[32];
    std::snprintf(name, sizeof(name), "synth_%05d", i);
    clip.item_id = name;
    clip.label = (i % 2 == 0) ? 1 : 0;
    clip.snr_db = rng.uniform(config.snr_db_lo, config.snr_db_hi);

    std::vector<double> noise(n_samples);
    PinkNoise pink;
    for (int s = 0; s < n_samples; ++s) {
      noise[s] = pink.next(rng.normal()) + 0.25 * rng.normal();
    }
    const double noise_rms = rms_of(noise);

    std::vector<double> signal(n_samples, 0.0);
    bool has_signal = false;
    if (clip.label == 1) {
      const double max_dur = std::min(0.15, 0.3 * config.clip_s);
      double t = rng.uniform(0.0, 0.2 * config.clip_s);
      while (true) {
        const double dur = rng.uniform(0.5 * max_dur, max_dur);
        if (t + dur > config.clip_s) break;
        const double f0 = rng.uniform(2000.0, 5000.0);
        const double f1 = rng.uniform(f0 + 500.0, 8000.0);
        add_chirp(&signal, config.sample_rate_hz, t, dur, f0, f1,
                  rng.uniform(0.0, 2.0 * kPi));
        has_signal = true;
        t += dur + rng.uniform(0.02, 0.1);
      }
      if (!has_signal) {
        const double dur = std::min(0.5 * config.clip_s, max_dur);
        add_chirp(&signal, config.sample_rate_hz, 0.25 * config.clip_s, dur,
                  3000.0, 6000.0, rng.uniform(0.0, 2.0 * kPi));
        has_signal = true;
      }
    } else if (rng.uniform() < 0.5) {
      // Low-frequency tonal distractor: loud, but not a bird.
      const double freq = rng.uniform(80.0, 400.0);
      const double phase0 = rng.uniform(0.0, 2.0 * kPi);
      for (int s = 0; s < n_samples; ++s) {
        signal[s] = std::sin(2.0 * kPi * freq * s / config.sample_rate_hz +
                             phase0);
      }
      has_signal = true;
    }

    std::vector<double> mixed = noise;
    if (has_signal) {
      double active_energy = 0.0;
      size_t active_count = 0;
      for (double s : signal) {
        if (s != 0.0) {
          active_energy += s * s;
          ++active_count;
        }
      }
      const double signal_rms =
          std::sqrt(active_energy / std::max<size_t>(1, active_count));
      const double gain =
          noise_rms * std::pow(10.0, clip.snr_db / 20.0) / signal_rms;
      for (int s = 0; s < n_samples; ++s) mixed[s] += gain * signal[s];
    }

    clip.waveform.sample_rate_hz = config.sample_rate_hz;
    clip.waveform.samples = std::move(mixed);
    clip.waveform = normalize_dbfs(clip.waveform, -2.0);
    clips.push_back(std::move(clip));
  }
  return clips;
}

}  // namespace avifront
