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

#include "avifront/wav_io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <vector>

namespace avifront {

namespace {

uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

void append_u16(std::vector<uint8_t>* out, uint16_t v) {
  out->push_back(static_cast<uint8_t>(v & 0xff));
  out->push_back(static_cast<uint8_t>((v >> 8) & 0xff));
}

void append_u32(std::vector<uint8_t>* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out->push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
  }
}

void append_tag(std::vector<uint8_t>* out, const char* tag) {
  out->insert(out->end(), tag, tag + 4);
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open wav file: " + path);
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<uint8_t> bytes(static_cast<size_t>(size));
  if (size > 0) {
    in.read(reinterpret_cast<char*>(bytes.data()), size);
  }
  if (!in) throw DataError("failed reading wav file: " + path);
  return bytes;
}

void write_file_bytes(const std::string& path,
                      const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing file: " + path);
}

struct FmtChunk {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t block_align = 0;
  uint16_t bits_per_sample = 0;
};

void write_wav(const std::string& path, const Waveform& waveform,
               bool as_float) {
  const uint16_t format = as_float ? 3 : 1;
  const uint16_t bits = as_float ? 32 : 16;
  const uint16_t block_align = bits / 8;
  const uint32_t data_size =
      static_cast<uint32_t>(waveform.samples.size()) * block_align;

  std::vector<uint8_t> out;
  out.reserve(44 + data_size);
  append_tag(&out, "RIFF");
  append_u32(&out, 36 + data_size);
  append_tag(&out, "WAVE");
  append_tag(&out, "fmt ");
  append_u32(&out, 16);
  append_u16(&out, format);
  append_u16(&out, 1);
  append_u32(&out, static_cast<uint32_t>(waveform.sample_rate_hz));
  append_u32(&out, static_cast<uint32_t>(waveform.sample_rate_hz) *
                       block_align);
  append_u16(&out, block_align);
  append_u16(&out, bits);
  append_tag(&out, "data");
  append_u32(&out, data_size);
  for (double s : waveform.samples) {
    if (as_float) {
      const float f = static_cast<float>(s);
      uint32_t u;
      std::memcpy(&u, &f, sizeof(u));
      append_u32(&out, u);
    } else {
      const long q = std::lround(s * 32768.0);
      const int16_t v = static_cast<int16_t>(std::clamp<long>(q, -32768, 32767));
      append_u16(&out, static_cast<uint16_t>(v));
    }
  }
  write_file_bytes(path, out);
}

}  // namespace

Waveform load_wav(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DataError("not a RIFF/WAVE file: " + path);
  }

  FmtChunk fmt;
  bool have_fmt = false;
  const uint8_t* data = nullptr;
  size_t data_size = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* tag = reinterpret_cast<const char*>(bytes.data() + pos);
    const uint32_t chunk_size = read_u32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + chunk_size > bytes.size()) {
      throw DataError("truncated wav chunk in " + path);
    }
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw DataError("malformed fmt chunk in " + path);
      fmt.format = read_u16(bytes.data() + pos);
      fmt.channels = read_u16(bytes.data() + pos + 2);
      fmt.sample_rate = read_u32(bytes.data() + pos + 4);
      fmt.block_align = read_u16(bytes.data() + pos + 12);
      fmt.bits_per_sample = read_u16(bytes.data() + pos + 14);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data = bytes.data() + pos;
      data_size = chunk_size;
    }
    pos += chunk_size + (chunk_size & 1);
  }
  if (!have_fmt) throw DataError("missing fmt chunk in " + path);
  if (data == nullptr) throw DataError("missing data chunk in " + path);
  if (fmt.channels == 0 || fmt.sample_rate == 0) {
    throw DataError("malformed fmt chunk in " + path);
  }
  const bool pcm16 = fmt.format == 1 && fmt.bits_per_sample == 16;
  const bool float32 = fmt.format == 3 && fmt.bits_per_sample == 32;
  if (!pcm16 && !float32) {
    throw DataError("unsupported wav encoding (need PCM16 or float32): " +
                    path);
  }
  const size_t bytes_per_sample = fmt.bits_per_sample / 8;
  const size_t frame_size = bytes_per_sample * fmt.channels;
  if (fmt.block_align != 0 && fmt.block_align != frame_size) {
    throw DataError("inconsistent block alignment in " + path);
  }
  const size_t n_frames = data_size / frame_size;

  Waveform waveform;
  waveform.sample_rate_hz = static_cast<int>(fmt.sample_rate);
  waveform.samples.resize(n_frames);
  for (size_t f = 0; f < n_frames; ++f) {
    const uint8_t* frame = data + f * frame_size;
    double acc = 0.0;
    for (int c = 0; c < fmt.channels; ++c) {
      const uint8_t* p = frame + c * bytes_per_sample;
      if (pcm16) {
        const int16_t v = static_cast<int16_t>(read_u16(p));
        acc += static_cast<double>(v) / 32768.0;
      } else {
        float fv;
        const uint32_t u = read_u32(p);
        std::memcpy(&fv, &u, sizeof(fv));
        acc += static_cast<double>(fv);
      }
    }
    waveform.samples[f] = acc / fmt.channels;
  }
  return waveform;
}

void write_wav_pcm16(const std::string& path, const Waveform& waveform) {
  write_wav(path, waveform, false);
}

void write_wav_float32(const std::string& path, const Waveform& waveform) {
  write_wav(path, waveform, true);
}

Waveform prepare_clip(const Waveform& in, int target_rate_hz,
                      double duration_s, PrepareInfo* info) {
  if (target_rate_hz <= 0) throw ConfigError("target sample rate must be > 0");
  if (duration_s <= 0.0) throw ConfigError("clip duration must be > 0");
  if (info != nullptr) {
    info->resampled = false;
    info->source_rate_hz = in.sample_rate_hz;
  }

  Waveform out;
  out.sample_rate_hz = target_rate_hz;
  if (in.sample_rate_hz == target_rate_hz || in.samples.empty()) {
    out.samples = in.samples;
  } else {
    if (info != nullptr) info->resampled = true;
    const double ratio =
        static_cast<double>(in.sample_rate_hz) / target_rate_hz;
    const size_t n_out = static_cast<size_t>(std::llround(
        static_cast<double>(in.samples.size()) / ratio));
    out.samples.resize(n_out);
    for (size_t i = 0; i < n_out; ++i) {
      const double src = static_cast<double>(i) * ratio;
      const size_t i0 = std::min(static_cast<size_t>(src),
                                 in.samples.size() - 1);
      const size_t i1 = std::min(i0 + 1, in.samples.size() - 1);
      const double frac = src - static_cast<double>(i0);
      out.samples[i] =
          (1.0 - frac) * in.samples[i0] + frac * in.samples[i1];
    }
  }

  const size_t target_len =
      static_cast<size_t>(std::llround(duration_s * target_rate_hz));
  out.samples.resize(target_len, 0.0);
  return out;
}

Waveform load_clip(const std::string& path, int target_rate_hz,
                   double duration_s, PrepareInfo* info) {
  const Waveform raw = load_wav(path);
  PrepareInfo local;
  Waveform out = prepare_clip(raw, target_rate_hz, duration_s, &local);
  if (local.resampled) {
    std::cerr << "warning: resampled " << path << " from "
              << local.source_rate_hz << " Hz to " << target_rate_hz
              << " Hz\n";
  }
  if (info != nullptr) *info = local;
  return out;
}

Waveform normalize_dbfs(const Waveform& in, double target_dbfs,
                        NormalizeInfo* info) {
  double peak = 0.0;
  for (double s : in.samples) peak = std::max(peak, std::fabs(s));
  NormalizeInfo local;
  Waveform out = in;
  if (peak <= 0.0) {
    local.silent = true;
  } else {
    local.scale = std::pow(10.0, target_dbfs / 20.0) / peak;
    for (double& s : out.samples) s *= local.scale;
  }
  if (info != nullptr) *info = local;
  return out;
}

}  // namespace avifront
