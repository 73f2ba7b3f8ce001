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

#include "avifront/io.h"

#include <cstring>
#include <fstream>

namespace avifront {

namespace {

void put_bytes(std::vector<uint8_t>* out, const void* data, size_t n) {
  const uint8_t* p = static_cast<const uint8_t*>(data);
  out->insert(out->end(), p, p + n);
}

void put_u32(std::vector<uint8_t>* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out->push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
  }
}

void put_u64(std::vector<uint8_t>* out, uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out->push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
  }
}

void put_f32(std::vector<uint8_t>* out, float v) {
  uint32_t u;
  std::memcpy(&u, &v, sizeof(u));
  put_u32(out, u);
}

void put_f64(std::vector<uint8_t>* out, double v) {
  uint64_t u;
  std::memcpy(&u, &v, sizeof(u));
  put_u64(out, u);
}

class Reader {
 public:
  Reader(std::vector<uint8_t> bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  void expect_magic(const char* magic) {
    if (pos_ + 4 > bytes_.size() ||
        std::memcmp(bytes_.data() + pos_, magic, 4) != 0) {
      throw DataError(path_ + ": bad magic (expected " + magic + ")");
    }
    pos_ += 4;
  }

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<uint32_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }

  float f32() {
    const uint32_t u = u32();
    float v;
    std::memcpy(&v, &u, sizeof(v));
    return v;
  }

  double f64() {
    const uint64_t u = u64();
    double v;
    std::memcpy(&v, &u, sizeof(v));
    return v;
  }

  std::string str(size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

  const std::string& path() const { return path_; }

 private:
  void need(size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw DataError(path_ + ": truncated file");
    }
  }

  std::vector<uint8_t> bytes_;
  std::string path_;
  size_t pos_ = 0;
};

Reader open_reader(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<uint8_t> bytes(static_cast<size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw DataError("failed reading file: " + path);
  return Reader(std::move(bytes), path);
}

void write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing file: " + path);
}

}  // namespace

void write_feature_file(const std::string& path, uint32_t kind,
                        const FeatureMap& features) {
  std::vector<uint8_t> out;
  out.reserve(32 + features.values.size() * 4);
  put_bytes(&out, "AVFE", 4);
  put_u32(&out, 1);
  put_u32(&out, kind);
  put_u32(&out, static_cast<uint32_t>(features.channels()));
  put_u32(&out, static_cast<uint32_t>(features.n_frames()));
  put_u32(&out, static_cast<uint32_t>(features.n_bands()));
  put_f64(&out, features.hop_s);
  for (double v : features.values.v) put_f32(&out, static_cast<float>(v));
  write_bytes(path, out);
}

FeatureMap read_feature_file(const std::string& path, uint32_t* kind_out) {
  Reader reader = open_reader(path);
  reader.expect_magic("AVFE");
  const uint32_t version = reader.u32();
  if (version != 1) {
    throw DataError(path + ": unsupported feature file version " +
                    std::to_string(version));
  }
  const uint32_t kind = reader.u32();
  const uint32_t channels = reader.u32();
  const uint32_t n_frames = reader.u32();
  const uint32_t n_bands = reader.u32();
  const double hop_s = reader.f64();
  FeatureMap features;
  features.hop_s = hop_s;
  features.values = Grid3(static_cast<int>(channels),
                          static_cast<int>(n_frames),
                          static_cast<int>(n_bands));
  for (double& v : features.values.v) v = reader.f32();
  if (!reader.at_end()) {
    throw DataError(path + ": trailing bytes after feature payload");
  }
  if (kind_out != nullptr) *kind_out = kind;
  return features;
}

void write_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  if (checkpoint.has_optimizer &&
      (checkpoint.moment1.size() != checkpoint.tensors.size() ||
       checkpoint.moment2.size() != checkpoint.tensors.size())) {
    throw ConfigError("checkpoint optimizer state does not match tensors");
  }
  std::vector<uint8_t> out;
  put_bytes(&out, "AVCK", 4);
  put_u32(&out, 1);
  put_u32(&out, static_cast<uint32_t>(checkpoint.config_echo.size()));
  put_bytes(&out, checkpoint.config_echo.data(),
            checkpoint.config_echo.size());
  put_u32(&out, static_cast<uint32_t>(checkpoint.tensors.size()));
  for (const auto& tensor : checkpoint.tensors) {
    if (tensor.values.size() != tensor.size()) {
      throw ConfigError("checkpoint tensor '" + tensor.name +
                        "' has inconsistent dims");
    }
    put_u32(&out, static_cast<uint32_t>(tensor.name.size()));
    put_bytes(&out, tensor.name.data(), tensor.name.size());
    put_u32(&out, static_cast<uint32_t>(tensor.dims.size()));
    for (uint32_t d : tensor.dims) put_u32(&out, d);
    for (double v : tensor.values) put_f64(&out, v);
  }
  out.push_back(checkpoint.has_optimizer ? 1 : 0);
  if (checkpoint.has_optimizer) {
    put_u64(&out, checkpoint.optimizer_step);
    for (size_t t = 0; t < checkpoint.tensors.size(); ++t) {
      if (checkpoint.moment1[t].size() != checkpoint.tensors[t].values.size() ||
          checkpoint.moment2[t].size() != checkpoint.tensors[t].values.size()) {
        throw ConfigError("checkpoint moment shape mismatch for '" +
                          checkpoint.tensors[t].name + "'");
      }
      for (double v : checkpoint.moment1[t]) put_f64(&out, v);
      for (double v : checkpoint.moment2[t]) put_f64(&out, v);
    }
  }
  write_bytes(path, out);
}

Checkpoint read_checkpoint(const std::string& path) {
  Reader reader = open_reader(path);
  reader.expect_magic("AVCK");
  const uint32_t version = reader.u32();
  if (version != 1) {
    throw DataError(path + ": unsupported checkpoint version " +
                    std::to_string(version));
  }
  Checkpoint checkpoint;
  const uint32_t config_len = reader.u32();
  checkpoint.config_echo = reader.str(config_len);
  const uint32_t n_tensors = reader.u32();
  checkpoint.tensors.resize(n_tensors);
  for (auto& tensor : checkpoint.tensors) {
    const uint32_t name_len = reader.u32();
    tensor.name = reader.str(name_len);
    const uint32_t rank = reader.u32();
    tensor.dims.resize(rank);
    for (auto& d : tensor.dims) d = reader.u32();
    tensor.values.resize(tensor.size());
    for (double& v : tensor.values) v = reader.f64();
  }
  checkpoint.has_optimizer = reader.u8() != 0;
  if (checkpoint.has_optimizer) {
    checkpoint.optimizer_step = reader.u64();
    checkpoint.moment1.resize(n_tensors);
    checkpoint.moment2.resize(n_tensors);
    for (uint32_t t = 0; t < n_tensors; ++t) {
      checkpoint.moment1[t].resize(checkpoint.tensors[t].values.size());
      for (double& v : checkpoint.moment1[t]) v = reader.f64();
      checkpoint.moment2[t].resize(checkpoint.tensors[t].values.size());
      for (double& v : checkpoint.moment2[t]) v = reader.f64();
    }
  }
  if (!reader.at_end()) {
    throw DataError(path + ": trailing bytes after checkpoint payload");
  }
  return checkpoint;
}

Checkpoint snapshot_params(const std::vector<ParamTensor*>& params,
                           const std::string& config_echo) {
  Checkpoint checkpoint;
  checkpoint.config_echo = config_echo;
  for (const ParamTensor* param : params) {
    CheckpointTensor tensor;
    tensor.name = param->name;
    for (int d : param->shape) tensor.dims.push_back(static_cast<uint32_t>(d));
    tensor.values = param->value;
    checkpoint.tensors.push_back(std::move(tensor));
  }
  return checkpoint;
}

void restore_params(const Checkpoint& checkpoint,
                    const std::vector<ParamTensor*>& params) {
  for (ParamTensor* param : params) {
    const CheckpointTensor* found = nullptr;
    for (const auto& tensor : checkpoint.tensors) {
      if (tensor.name == param->name) {
        found = &tensor;
        break;
      }
    }
    if (found == nullptr) {
      throw DataError("checkpoint is missing tensor '" + param->name + "'");
    }
    if (found->values.size() != param->value.size()) {
      throw DataError("checkpoint tensor '" + param->name +
                      "' has wrong size");
    }
    param->value = found->values;
  }
}

}  // namespace avifront
