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
#include <vector>

#include "avifront/param.h"
#include "avifront/types.h"

namespace avifront {

// Feature file layout (all integers and floats little-endian):
//   magic "AVFE" | u32 version=1 | u32 kind | u32 channels | u32 n_frames
//   | u32 n_bands | f64 hop_s | f32 payload, channel-major.
void write_feature_file(const std::string& path, uint32_t kind,
                        const FeatureMap& features);
FeatureMap read_feature_file(const std::string& path,
                             uint32_t* kind_out = nullptr);

struct CheckpointTensor {
  std::string name;
  std::vector<uint32_t> dims;
  std::vector<double> values;

  size_t size() const {
    size_t n = 1;
    for (uint32_t d : dims) n *= d;
    return n;
  }
};

// Checkpoint layout (all little-endian):
//   magic "AVCK" | u32 version=1 | u32 config_len | config bytes
//   | u32 n_tensors | tensors (u32 name_len, name, u32 rank, u32 dims[rank],
//   f64 values) | u8 has_optimizer | if set: u64 step_count followed by f64
//   first/second moments per tensor in checkpoint order.
struct Checkpoint {
  std::string config_echo;
  std::vector<CheckpointTensor> tensors;
  bool has_optimizer = false;
  uint64_t optimizer_step = 0;
  std::vector<std::vector<double>> moment1;
  std::vector<std::vector<double>> moment2;
};

void write_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::string& path);

/// Copies parameter values (and optional optimizer moments) into a
/// Checkpoint, preserving order.
Checkpoint snapshot_params(const std::vector<ParamTensor*>& params,
                           const std::string& config_echo);

/// Restores values into params by name; shapes must match.
void restore_params(const Checkpoint& checkpoint,
                    const std::vector<ParamTensor*>& params);

}  // namespace avifront
