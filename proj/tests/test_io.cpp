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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "avifront/io.h"
#include "avifront/param.h"
#include "avifront/types.h"
#include "doctest.h"

using namespace avifront;
namespace fs = std::filesystem;

namespace {

std::string tmp_file(const std::string& name) {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "avifront_test_io";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return (dir / name).string();
}

std::vector<uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

FeatureMap sample_features() {
  FeatureMap f;
  f.hop_s = 110.0 / 44100.0;
  f.values = Grid3(3, 5, 4);
  for (size_t i = 0; i < f.values.v.size(); ++i) {
    f.values.v[i] = 0.001 * static_cast<double>(i) - 0.0123456789;
  }
  return f;
}

Checkpoint sample_checkpoint(bool with_optimizer) {
  Checkpoint c;
  c.config_echo = "frontend.kind = mel\ntrain.lr = 0.001\n";
  CheckpointTensor a;
  a.name = "clf.conv0.w";
  a.dims = {2, 1, 3, 3};
  for (size_t i = 0; i < a.size(); ++i) {
    a.values.push_back(0.25 * static_cast<double>(i) - 1.0);
  }
  CheckpointTensor b;
  b.name = "pcen.log_alpha";
  b.dims = {4};
  b.values = {-0.02, -0.01, 0.0, 0.125};
  c.tensors = {a, b};
  if (with_optimizer) {
    c.has_optimizer = true;
    c.optimizer_step = 1234567890123ull;
    for (const auto& t : c.tensors) {
      std::vector<double> m1(t.values.size()), m2(t.values.size());
      for (size_t i = 0; i < t.values.size(); ++i) {
        m1[i] = 1e-3 * static_cast<double>(i + 1);
        m2[i] = 1e-6 * static_cast<double>(i + 1);
      }
      c.moment1.push_back(m1);
      c.moment2.push_back(m2);
    }
  }
  return c;
}

}  // namespace

TEST_CASE("feature file round trip") {
  const FeatureMap f = sample_features();
  const std::string path = tmp_file("feat.avfe");
  write_feature_file(path, 6, f);

  uint32_t kind = 0;
  const FeatureMap r = read_feature_file(path, &kind);
  CHECK(kind == 6u);
  CHECK(r.channels() == 3);
  CHECK(r.n_frames() == 5);
  CHECK(r.n_bands() == 4);
  CHECK(r.hop_s == f.hop_s);  // hop is stored at full double precision
  REQUIRE(r.values.v.size() == f.values.v.size());
  // The payload is float32 by design: expect exactly the f32-rounded values.
  for (size_t i = 0; i < f.values.v.size(); ++i) {
    CHECK(r.values.v[i] ==
          static_cast<double>(static_cast<float>(f.values.v[i])));
  }

  // kind_out is optional.
  const FeatureMap r2 = read_feature_file(path);
  CHECK(r2.values.v == r.values.v);
}

TEST_CASE("feature file error handling") {
  const FeatureMap f = sample_features();
  const std::string path = tmp_file("feat_err.avfe");
  write_feature_file(path, 1, f);
  const std::vector<uint8_t> good = slurp(path);

  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_feature_file(tmp_file("nope.avfe")), DataError);
  }
  SUBCASE("bad magic") {
    std::vector<uint8_t> bytes = good;
    bytes[0] = 'X';
    spit(path, bytes);
    try {
      read_feature_file(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("bad magic") != std::string::npos);
      CHECK(std::string(e.what()).find(path) != std::string::npos);
    }
  }
  SUBCASE("unsupported version") {
    std::vector<uint8_t> bytes = good;
    bytes[4] = 9;
    spit(path, bytes);
    try {
      read_feature_file(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("version 9") != std::string::npos);
    }
  }
  SUBCASE("truncated payload") {
    std::vector<uint8_t> bytes = good;
    bytes.resize(bytes.size() - 3);
    spit(path, bytes);
    try {
      read_feature_file(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    }
  }
  SUBCASE("trailing bytes") {
    std::vector<uint8_t> bytes = good;
    bytes.push_back(0);
    spit(path, bytes);
    try {
      read_feature_file(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("trailing") != std::string::npos);
    }
  }
}

TEST_CASE("checkpoint round trip preserves doubles exactly") {
  const std::string path = tmp_file("plain.avck");
  const Checkpoint c = sample_checkpoint(false);
  write_checkpoint(path, c);
  const Checkpoint r = read_checkpoint(path);
  CHECK(r.config_echo == c.config_echo);
  REQUIRE(r.tensors.size() == 2u);
  CHECK(r.tensors[0].name == "clf.conv0.w");
  CHECK(r.tensors[0].dims == std::vector<uint32_t>{2, 1, 3, 3});
  CHECK(r.tensors[0].values == c.tensors[0].values);
  CHECK(r.tensors[1].name == "pcen.log_alpha");
  CHECK(r.tensors[1].values == c.tensors[1].values);
  CHECK_FALSE(r.has_optimizer);
  CHECK(r.moment1.empty());
}

TEST_CASE("checkpoint round trip with optimizer state") {
  const std::string path = tmp_file("opt.avck");
  const Checkpoint c = sample_checkpoint(true);
  write_checkpoint(path, c);
  const Checkpoint r = read_checkpoint(path);
  CHECK(r.has_optimizer);
  CHECK(r.optimizer_step == 1234567890123ull);
  REQUIRE(r.moment1.size() == 2u);
  REQUIRE(r.moment2.size() == 2u);
  CHECK(r.moment1[0] == c.moment1[0]);
  CHECK(r.moment1[1] == c.moment1[1]);
  CHECK(r.moment2[0] == c.moment2[0]);
  CHECK(r.moment2[1] == c.moment2[1]);

  // Byte-identical rewrite.
  const std::string path2 = tmp_file("opt2.avck");
  write_checkpoint(path2, r);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("checkpoint write validation") {
  Checkpoint c = sample_checkpoint(true);
  c.moment1.pop_back();
  CHECK_THROWS_AS(write_checkpoint(tmp_file("bad1.avck"), c), ConfigError);

  Checkpoint d = sample_checkpoint(true);
  d.moment2[0].pop_back();
  CHECK_THROWS_AS(write_checkpoint(tmp_file("bad2.avck"), d), ConfigError);

  Checkpoint e = sample_checkpoint(false);
  e.tensors[0].values.pop_back();
  CHECK_THROWS_AS(write_checkpoint(tmp_file("bad3.avck"), e), ConfigError);
}

TEST_CASE("checkpoint read error handling") {
  const std::string path = tmp_file("read_err.avck");
  write_checkpoint(path, sample_checkpoint(true));
  const std::vector<uint8_t> good = slurp(path);

  SUBCASE("bad magic") {
    std::vector<uint8_t> bytes = good;
    bytes[3] = '?';
    spit(path, bytes);
    CHECK_THROWS_AS(read_checkpoint(path), DataError);
  }
  SUBCASE("unsupported version") {
    std::vector<uint8_t> bytes = good;
    bytes[4] = 2;
    spit(path, bytes);
    CHECK_THROWS_AS(read_checkpoint(path), DataError);
  }
  SUBCASE("truncated") {
    std::vector<uint8_t> bytes = good;
    bytes.resize(bytes.size() - 1);
    spit(path, bytes);
    try {
      read_checkpoint(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    }
  }
  SUBCASE("trailing bytes") {
    std::vector<uint8_t> bytes = good;
    bytes.push_back(7);
    spit(path, bytes);
    CHECK_THROWS_AS(read_checkpoint(path), DataError);
  }
}

TEST_CASE("snapshot and restore params by name") {
  ParamTensor w("fe.w", {2, 3});
  ParamTensor b("fe.b", {3});
  for (size_t i = 0; i < w.size(); ++i) w.value[i] = 0.1 * (i + 1);
  for (size_t i = 0; i < b.size(); ++i) b.value[i] = -0.5 * (i + 1);

  const Checkpoint snap = snapshot_params({&w, &b}, "echo!");
  CHECK(snap.config_echo == "echo!");
  REQUIRE(snap.tensors.size() == 2u);
  CHECK(snap.tensors[0].name == "fe.w");
  CHECK(snap.tensors[0].dims == std::vector<uint32_t>{2, 3});
  CHECK(snap.tensors[0].values == w.value);
  CHECK_FALSE(snap.has_optimizer);

  const std::vector<double> w_orig = w.value;
  const std::vector<double> b_orig = b.value;
  for (auto& v : w.value) v = 99.0;
  for (auto& v : b.value) v = 99.0;
  // Restore matches by name, not position.
  restore_params(snap, {&b, &w});
  CHECK(w.value == w_orig);
  CHECK(b.value == b_orig);

  SUBCASE("missing tensor") {
    ParamTensor other("fe.missing", {3});
    CHECK_THROWS_AS(restore_params(snap, {&other}), DataError);
  }
  SUBCASE("size mismatch") {
    ParamTensor wrong("fe.w", {2, 4});
    CHECK_THROWS_AS(restore_params(snap, {&wrong}), DataError);
  }
}
