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

#include "avifront/config.h"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace avifront {

namespace {

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

/// Shortest decimal form that round-trips the double.
std::string format_double(double v) {
  char buf[64];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

}  // namespace

bool KeyValueConfig::has(const std::string& key) const {
  return values_.count(key) > 0;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0') {
    throw ConfigError("config key " + key + ": '" + it->second +
                      "' is not a number");
  }
  return v;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  const long v = std::strtol(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0') {
    throw ConfigError("config key " + key + ": '" + it->second +
                      "' is not an integer");
  }
  return static_cast<int>(v);
}

uint64_t KeyValueConfig::get_u64(const std::string& key,
                                 uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0') {
    throw ConfigError("config key " + key + ": '" + it->second +
                      "' is not an unsigned integer");
  }
  return static_cast<uint64_t>(v);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config key " + key + ": '" + v + "' is not a boolean");
}

KeyValueConfig parse_config_text(const std::string& text) {
  KeyValueConfig kv;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key");
    }
    const std::string full_key =
        (section.empty() || key.find('.') != std::string::npos)
            ? key
            : section + "." + key;
    kv.set(full_key, value);
  }
  return kv;
}

KeyValueConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "frontend.kind",
      "dsp.sample_rate_hz",
      "dsp.window_s",
      "dsp.overlap",
      "dsp.n_mels",
      "dsp.f_min_hz",
      "dsp.f_max_hz",
      "dsp.floor_eps",
      "strf.n_filters",
      "strf.half_t",
      "strf.half_f",
      "bank.n_filters",
      "bank.kernel_s",
      "pcen.alpha",
      "pcen.delta",
      "pcen.r",
      "pcen.s",
      "pcen.eps",
      "pcen.learn_s",
      "train.lr",
      "train.epochs",
      "train.batch_size",
      "train.patience",
      "train.min_delta",
      "train.lr_factor",
      "train.lr_min",
      "train.seed",
      "train.target_val_acc",
      "split.train",
      "split.val",
      "split.test",
      "split.seed",
      "split.file",
      "data.clip_s",
      "data.audio_root",
      "data.manifests",
      "out.dir",
      "synth.n_clips",
      "synth.sample_rate_hz",
      "synth.clip_s",
      "synth.snr_db_lo",
      "synth.snr_db_hi",
      "synth.seed",
  };
  return keys;
}

ManifestSource parse_manifest_source(const std::string& spec) {
  const size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= spec.size()) {
    throw ConfigError("manifest spec must be name=path, got '" + spec + "'");
  }
  return ManifestSource{trim(spec.substr(0, eq)), trim(spec.substr(eq + 1))};
}

}  // namespace

RunConfig resolve_run_config(const KeyValueConfig& kv,
                             const std::vector<std::string>& manifest_flags) {
  for (const auto& [key, value] : kv.values()) {
    (void)value;
    if (known_keys().count(key) == 0) {
      throw ConfigError("unknown config key: " + key);
    }
  }

  RunConfig rc;
  rc.kind = frontend_kind_from_string(kv.get_string("frontend.kind", "logmel"));
  rc.frontend.sample_rate_hz = kv.get_int("dsp.sample_rate_hz", 44100);
  rc.frontend.win_len_s = kv.get_double("dsp.window_s", 0.01);
  rc.frontend.overlap = kv.get_double("dsp.overlap", 0.75);
  rc.frontend.n_mels = kv.get_int("dsp.n_mels", 41);
  rc.frontend.f_min_hz = kv.get_double("dsp.f_min_hz", 500.0);
  rc.frontend.f_max_hz = kv.get_double("dsp.f_max_hz", 16000.0);
  rc.frontend.log_floor_eps = kv.get_double("dsp.floor_eps", 1e-10);
  rc.frontend.strf_n_filters = kv.get_int("strf.n_filters", 64);
  rc.frontend.strf_half_t = kv.get_int("strf.half_t", 5);
  rc.frontend.strf_half_f = kv.get_int("strf.half_f", 5);
  rc.frontend.n_filters = kv.get_int("bank.n_filters", 40);
  rc.frontend.kernel_len_s = kv.get_double("bank.kernel_s", 0.025);
  rc.frontend.pcen_alpha = kv.get_double("pcen.alpha", 0.98);
  rc.frontend.pcen_delta = kv.get_double("pcen.delta", 2.0);
  rc.frontend.pcen_r = kv.get_double("pcen.r", 0.5);
  rc.frontend.pcen_s = kv.get_double("pcen.s", 0.04);
  rc.frontend.pcen_eps = kv.get_double("pcen.eps", 1e-6);
  rc.frontend.pcen_learn_s = kv.get_bool("pcen.learn_s", false);

  rc.train.lr = kv.get_double("train.lr", 1e-3);
  rc.train.epochs = kv.get_int("train.epochs", 30);
  rc.train.batch_size = kv.get_int("train.batch_size", 8);
  rc.train.patience = kv.get_int("train.patience", 5);
  rc.train.min_delta = kv.get_double("train.min_delta", 1e-4);
  rc.train.lr_factor = kv.get_double("train.lr_factor", 10.0);
  rc.train.lr_min = kv.get_double("train.lr_min", 1e-6);
  rc.train.seed = kv.get_u64("train.seed", 0);
  rc.train.target_val_acc = kv.get_double("train.target_val_acc", -1.0);

  rc.ratios.train = kv.get_double("split.train", 0.7);
  rc.ratios.val = kv.get_double("split.val", 0.15);
  rc.ratios.test = kv.get_double("split.test", 0.15);
  rc.split_seed = kv.get_u64("split.seed", 0);
  rc.split_file = kv.get_string("split.file", "");

  rc.clip_s = kv.get_double("data.clip_s", 10.0);
  const char* env_root = std::getenv("AVIFRONT_DATA_ROOT");
  rc.audio_root =
      kv.get_string("data.audio_root", env_root != nullptr ? env_root : "");
  rc.output_dir = kv.get_string("out.dir", "out");

  rc.synth.n_clips = kv.get_int("synth.n_clips", 200);
  rc.synth.sample_rate_hz = kv.get_int("synth.sample_rate_hz", 22050);
  rc.synth.clip_s = kv.get_double("synth.clip_s", 0.5);
  rc.synth.snr_db_lo = kv.get_double("synth.snr_db_lo", 10.0);
  rc.synth.snr_db_hi = kv.get_double("synth.snr_db_hi", 30.0);
  rc.synth.seed = kv.get_u64("synth.seed", 0);

  const std::string joined = kv.get_string("data.manifests", "");
  if (!joined.empty()) {
    std::stringstream ss(joined);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!trim(item).empty()) {
        rc.manifests.push_back(parse_manifest_source(trim(item)));
      }
    }
  }
  for (const auto& flag : manifest_flags) {
    rc.manifests.push_back(parse_manifest_source(flag));
  }
  std::set<std::string> names;
  for (const auto& m : rc.manifests) {
    if (!names.insert(m.name).second) {
      throw ConfigError("duplicate manifest name: " + m.name);
    }
  }

  validate_frontend_config(rc.frontend);
  if (rc.train.epochs < 0) throw ConfigError("train.epochs must be >= 0");
  if (rc.train.batch_size < 1) {
    throw ConfigError("train.batch_size must be >= 1");
  }
  if (rc.train.patience < 1) throw ConfigError("train.patience must be >= 1");
  if (rc.train.lr_factor <= 1.0) {
    throw ConfigError("train.lr_factor must be > 1");
  }
  if (rc.clip_s <= 0.0) throw ConfigError("data.clip_s must be > 0");
  if (rc.ratios.train < 0.0 || rc.ratios.val < 0.0 || rc.ratios.test < 0.0 ||
      std::fabs(rc.ratios.train + rc.ratios.val + rc.ratios.test - 1.0) >
          1e-9) {
    throw ConfigError("split ratios must be nonnegative and sum to 1");
  }
  return rc;
}

std::string RunConfig::render() const {
  std::map<std::string, std::string> out;
  out["frontend.kind"] = to_string(kind);
  out["dsp.sample_rate_hz"] = std::to_string(frontend.sample_rate_hz);
  out["dsp.window_s"] = format_double(frontend.win_len_s);
  out["dsp.overlap"] = format_double(frontend.overlap);
  out["dsp.n_mels"] = std::to_string(frontend.n_mels);
  out["dsp.f_min_hz"] = format_double(frontend.f_min_hz);
  out["dsp.f_max_hz"] = format_double(frontend.f_max_hz);
  out["dsp.floor_eps"] = format_double(frontend.log_floor_eps);
  out["strf.n_filters"] = std::to_string(frontend.strf_n_filters);
  out["strf.half_t"] = std::to_string(frontend.strf_half_t);
  out["strf.half_f"] = std::to_string(frontend.strf_half_f);
  out["bank.n_filters"] = std::to_string(frontend.n_filters);
  out["bank.kernel_s"] = format_double(frontend.kernel_len_s);
  out["pcen.alpha"] = format_double(frontend.pcen_alpha);
  out["pcen.delta"] = format_double(frontend.pcen_delta);
  out["pcen.r"] = format_double(frontend.pcen_r);
  out["pcen.s"] = format_double(frontend.pcen_s);
  out["pcen.eps"] = format_double(frontend.pcen_eps);
  out["pcen.learn_s"] = frontend.pcen_learn_s ? "true" : "false";
  out["train.lr"] = format_double(train.lr);
  out["train.epochs"] = std::to_string(train.epochs);
  out["train.batch_size"] = std::to_string(train.batch_size);
  out["train.patience"] = std::to_string(train.patience);
  out["train.min_delta"] = format_double(train.min_delta);
  out["train.lr_factor"] = format_double(train.lr_factor);
  out["train.lr_min"] = format_double(train.lr_min);
  out["train.seed"] = std::to_string(train.seed);
  out["train.target_val_acc"] = format_double(train.target_val_acc);
  out["split.train"] = format_double(ratios.train);
  out["split.val"] = format_double(ratios.val);
  out["split.test"] = format_double(ratios.test);
  out["split.seed"] = std::to_string(split_seed);
  out["split.file"] = split_file;
  out["data.clip_s"] = format_double(clip_s);
  out["data.audio_root"] = audio_root;
  out["out.dir"] = output_dir;
  out["synth.n_clips"] = std::to_string(synth.n_clips);
  out["synth.sample_rate_hz"] = std::to_string(synth.sample_rate_hz);
  out["synth.clip_s"] = format_double(synth.clip_s);
  out["synth.snr_db_lo"] = format_double(synth.snr_db_lo);
  out["synth.snr_db_hi"] = format_double(synth.snr_db_hi);
  out["synth.seed"] = std::to_string(synth.seed);
  std::string manifests;
  for (const auto& m : this->manifests) {
    if (!manifests.empty()) manifests += ",";
    manifests += m.name + "=" + m.path;
  }
  out["data.manifests"] = manifests;

  std::ostringstream text;
  for (const auto& [key, value] : out) text << key << "=" << value << "\n";
  return text.str();
}

}  // namespace avifront
