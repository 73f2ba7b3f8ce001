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
#include <map>
#include <string>

#include "avifront/dataset.h"
#include "avifront/frontend.h"
#include "avifront/trainer.h"

namespace avifront {

/// Flat key=value store. Config files use INI-style sections; [dsp] with
/// window_s=0.01 becomes the dotted key dsp.window_s. CLI flags override
/// file values.
class KeyValueConfig {
 public:
  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

KeyValueConfig parse_config_text(const std::string& text);
KeyValueConfig load_config_file(const std::string& path);

struct ManifestSource {
  std::string name;
  std::string path;
};

/// Fully resolved run configuration (defaults applied, validated).
struct RunConfig {
  FrontendKind kind = FrontendKind::Logmel;
  FrontendConfig frontend;
  TrainConfig train;
  SplitRatios ratios;
  uint64_t split_seed = 0;
  double clip_s = 10.0;

  std::vector<ManifestSource> manifests;
  std::string audio_root;
  std::string output_dir = "out";
  std::string split_file;

  SynthConfig synth;

  /// Canonical text form: every resolved key, sorted, one key=value per line.
  std::string render() const;
};

/// Applies defaults and validates every module precondition up front.
/// `manifest_flags` holds raw name=path pairs from repeated --manifest flags.
RunConfig resolve_run_config(const KeyValueConfig& kv,
                             const std::vector<std::string>& manifest_flags);

}  // namespace avifront
