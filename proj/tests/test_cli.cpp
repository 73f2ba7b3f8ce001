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
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "avifront/config.h"
#include "avifront/io.h"
#include "doctest.h"

using namespace avifront;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "avifront_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string at(const std::string& rel) { return (work_dir() / rel).string(); }

struct CmdResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
};

CmdResult run_cli(const std::string& args) {
  const char* cli = std::getenv("AVIFRONT_CLI");
  REQUIRE_MESSAGE(cli != nullptr,
                  "AVIFRONT_CLI must point at the avifront binary");
  const std::string cmd = std::string("\"") + cli + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult result;
  char buf[4096];
  size_t n = 0;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) {
    result.output.append(buf, n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

// Small, fast configuration shared by the pipeline tests: 8 kHz synthetic
// clips, a narrow mel range below Nyquist, few epochs.
const char* kSmall =
    "--set dsp.sample_rate_hz=8000 --set dsp.f_min_hz=300 "
    "--set dsp.f_max_hz=3500 --set dsp.n_mels=16 --set data.clip_s=0.12 "
    "--set synth.sample_rate_hz=8000 --set synth.clip_s=0.12 "
    "--set synth.n_clips=32 --set train.batch_size=4 ";

}  // namespace

TEST_CASE("ini parsing maps sections to dotted keys") {
  const KeyValueConfig kv = parse_config_text(
      "# comment\n"
      "; also a comment\n"
      "[dsp]\n"
      "n_mels = 24\n"
      "window_s=0.02\r\n"
      "\n"
      "[train]\n"
      "lr = 0.01\n"
      "pcen.learn_s = true\n"
      "top_level = 7\n");
  CHECK(kv.get_int("dsp.n_mels", 0) == 24);
  CHECK(kv.get_double("dsp.window_s", 0.0) == doctest::Approx(0.02));
  CHECK(kv.get_double("train.lr", 0.0) == doctest::Approx(0.01));
  // A dotted key keeps its own prefix even inside a section.
  CHECK(kv.get_bool("pcen.learn_s", false));
  CHECK(kv.has("train.top_level"));
  CHECK_FALSE(kv.has("dsp.missing"));
}

TEST_CASE("ini parse errors carry line numbers") {
  try {
    parse_config_text("[dsp]\nn_mels = 24\n[oops\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("novalue\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("= 5\n"), ConfigError);
}

TEST_CASE("typed getters validate their values") {
  KeyValueConfig kv;
  kv.set("a", "12");
  kv.set("b", "0.5");
  kv.set("c", "yes");
  kv.set("d", "off");
  kv.set("bad", "12abc");
  CHECK(kv.get_int("a", 0) == 12);
  CHECK(kv.get_double("b", 0.0) == 0.5);
  CHECK(kv.get_bool("c", false));
  CHECK_FALSE(kv.get_bool("d", true));
  CHECK(kv.get_int("missing", 7) == 7);
  CHECK(kv.get_string("missing", "x") == "x");
  CHECK(kv.get_u64("missing", 9u) == 9u);
  CHECK_THROWS_AS(kv.get_int("bad", 0), ConfigError);
  CHECK_THROWS_AS(kv.get_double("bad", 0.0), ConfigError);
  CHECK_THROWS_AS(kv.get_bool("bad", false), ConfigError);
  CHECK_THROWS_AS(kv.get_u64("bad", 0), ConfigError);
}

TEST_CASE("resolve_run_config applies defaults and validates") {
  const RunConfig rc = resolve_run_config(KeyValueConfig{}, {});
  CHECK(rc.kind == FrontendKind::Logmel);
  CHECK(rc.frontend.sample_rate_hz == 44100);
  CHECK(rc.frontend.n_mels == 41);
  CHECK(rc.frontend.f_min_hz == 500.0);
  CHECK(rc.frontend.f_max_hz == 16000.0);
  CHECK(rc.train.lr == 1e-3);
  CHECK(rc.train.epochs == 30);
  CHECK(rc.ratios.train == 0.7);
  CHECK(rc.clip_s == 10.0);
  CHECK(rc.synth.n_clips == 200);
  CHECK(rc.manifests.empty());

  KeyValueConfig kv;
  SUBCASE("unknown keys are rejected") {
    kv.set("dsp.typo_mels", "41");
    CHECK_THROWS_AS(resolve_run_config(kv, {}), ConfigError);
  }
  SUBCASE("train validation") {
    kv.set("train.batch_size", "0");
    CHECK_THROWS_AS(resolve_run_config(kv, {}), ConfigError);
  }
  SUBCASE("lr_factor must shrink the rate") {
    kv.set("train.lr_factor", "1");
    CHECK_THROWS_AS(resolve_run_config(kv, {}), ConfigError);
  }
  SUBCASE("patience") {
    kv.set("train.patience", "0");
    CHECK_THROWS_AS(resolve_run_config(kv, {}), ConfigError);
  }
  SUBCASE("ratios must sum to 1") {
    kv.set("split.train", "0.9");
    CHECK_THROWS_AS(resolve_run_config(kv, {}), ConfigError);
  }
  SUBCASE("frontend validation is applied") {
    kv.set("dsp.n_mels", "0");
    CHECK_THROWS_AS(resolve_run_config(kv, {}), ConfigError);
  }
  SUBCASE("clip length") {
    kv.set("data.clip_s", "0");
    CHECK_THROWS_AS(resolve_run_config(kv, {}), ConfigError);
  }
}

TEST_CASE("manifest sources from config and flags") {
  KeyValueConfig kv;
  kv.set("data.manifests", "a=/p/a.csv, b=/p/b.csv");
  const RunConfig rc = resolve_run_config(kv, {"c=/p/c.csv"});
  REQUIRE(rc.manifests.size() == 3u);
  CHECK(rc.manifests[0].name == "a");
  CHECK(rc.manifests[0].path == "/p/a.csv");
  CHECK(rc.manifests[1].name == "b");
  CHECK(rc.manifests[2].name == "c");
  CHECK_THROWS_AS(resolve_run_config(kv, {"a=/dup.csv"}), ConfigError);
  CHECK_THROWS_AS(resolve_run_config(KeyValueConfig{}, {"nopath"}),
                  ConfigError);
}

TEST_CASE("audio root falls back to the environment") {
  setenv("AVIFRONT_DATA_ROOT", "/env/root", 1);
  const RunConfig from_env = resolve_run_config(KeyValueConfig{}, {});
  CHECK(from_env.audio_root == "/env/root");

  KeyValueConfig kv;
  kv.set("data.audio_root", "/explicit");
  const RunConfig from_kv = resolve_run_config(kv, {});
  CHECK(from_kv.audio_root == "/explicit");

  unsetenv("AVIFRONT_DATA_ROOT");
  const RunConfig bare = resolve_run_config(KeyValueConfig{}, {});
  CHECK(bare.audio_root.empty());
}

TEST_CASE("rendered config round-trips through the parser") {
  const RunConfig rc = resolve_run_config(KeyValueConfig{}, {});
  const std::string r1 = rc.render();
  const RunConfig rc2 = resolve_run_config(parse_config_text(r1), {});
  CHECK(rc2.render() == r1);

  KeyValueConfig kv;
  kv.set("frontend.kind", "leaf");
  kv.set("train.lr", "0.05");
  kv.set("dsp.window_s", "0.025");
  kv.set("pcen.learn_s", "true");
  kv.set("data.manifests", "ds=/data/ds.csv");
  const RunConfig custom = resolve_run_config(kv, {});
  const std::string c1 = custom.render();
  CHECK(c1.find("frontend.kind=leaf\n") != std::string::npos);
  CHECK(c1.find("train.lr=0.05\n") != std::string::npos);
  CHECK(c1.find("data.manifests=ds=/data/ds.csv\n") != std::string::npos);
  const RunConfig custom2 = resolve_run_config(parse_config_text(c1), {});
  CHECK(custom2.render() == c1);
}

TEST_CASE("cli: print-config emits the resolved configuration") {
  const CmdResult r = run_cli("train --print-config --frontend mel "
                              "--set train.lr=0.5 --seed 4");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("frontend.kind=mel\n") != std::string::npos);
  CHECK(r.output.find("train.lr=0.5\n") != std::string::npos);
  CHECK(r.output.find("train.seed=4\n") != std::string::npos);
  CHECK(r.output.find("split.seed=4\n") != std::string::npos);
  // The printed form is itself a valid config that resolves unchanged.
  const RunConfig rc = resolve_run_config(parse_config_text(r.output), {});
  CHECK(rc.render() == r.output);
}

TEST_CASE("cli: bad arguments and missing inputs map to exit codes") {
  CHECK(run_cli("").exit_code != 0);
  CHECK(run_cli("notacommand").exit_code != 0);

  const CmdResult bad_key = run_cli("train --set nope.key=1");
  CHECK(bad_key.exit_code == 1);
  CHECK(bad_key.output.find("config error") != std::string::npos);
  CHECK(bad_key.output.find("unknown config key") != std::string::npos);

  const CmdResult bad_value = run_cli("train --set train.batch_size=abc");
  CHECK(bad_value.exit_code == 1);

  const CmdResult bad_frontend = run_cli("train --frontend mfcc");
  CHECK(bad_frontend.exit_code == 1);

  const CmdResult missing = run_cli(
      "train --manifest ds=/nonexistent/manifest.csv");
  CHECK(missing.exit_code == 2);
  CHECK(missing.output.find("data error") != std::string::npos);
}

TEST_CASE("cli: synth writes a corpus with manifest") {
  unsetenv("AVIFRONT_DATA_ROOT");
  const CmdResult r = run_cli(std::string("synth ") + kSmall + "--seed 5 --out \"" +
                              at("corpus") + "\"");
  CAPTURE(r.output);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("wrote 32 clips (16 positive / 16 negative)") !=
        std::string::npos);
  const std::string manifest = read_text(at("corpus/manifest.csv"));
  CHECK(manifest.rfind("itemid,hasbird,snr_db\n", 0) == 0);
  CHECK(count_lines(manifest) == 33);
  CHECK(fs::exists(at("corpus/synth_00000.wav")));
  CHECK(fs::exists(at("corpus/synth_00031.wav")));
}

TEST_CASE("cli: extract is idempotent unless forced") {
  const std::string args = std::string("extract ") + kSmall +
                           "--frontend logmel --manifest synth=\"" +
                           at("corpus/manifest.csv") + "\" --out \"" +
                           at("features") + "\"";
  const CmdResult first = run_cli(args);
  CAPTURE(first.output);
  CHECK(first.exit_code == 0);
  CHECK(first.output.find("extracted 32 feature files, skipped 0, failed 0") !=
        std::string::npos);
  CHECK(fs::exists(at("features/synth/synth_00000.avfe")));

  uint32_t kind = 0;
  const FeatureMap f =
      read_feature_file(at("features/synth/synth_00000.avfe"), &kind);
  CHECK(kind == 2u);  // logmel
  CHECK(f.channels() == 1);
  CHECK(f.n_bands() == 16);
  CHECK(f.n_frames() > 0);

  const CmdResult second = run_cli(args);
  CHECK(second.exit_code == 0);
  CHECK(second.output.find("extracted 0 feature files, skipped 32, failed 0") !=
        std::string::npos);

  const CmdResult forced = run_cli(args + " --force");
  CHECK(forced.exit_code == 0);
  CHECK(forced.output.find("extracted 32 feature files, skipped 0, failed 0") !=
        std::string::npos);
}

TEST_CASE("cli: training is deterministic in the seed") {
  const std::string common = std::string("train ") + kSmall +
                             "--frontend logmel --epochs 4 --lr 0.01 "
                             "--seed 9 --manifest synth=\"" +
                             at("corpus/manifest.csv") + "\" --out \"";
  const CmdResult a = run_cli(common + at("runA") + "\"");
  CAPTURE(a.output);
  CHECK(a.exit_code == 0);
  CHECK(a.output.find("best epoch") != std::string::npos);
  for (const char* artifact :
       {"runA/config.txt", "runA/split.csv", "runA/train_log.csv",
        "runA/checkpoint.avck"}) {
    CHECK(fs::exists(at(artifact)));
  }
  const std::string log_a = read_text(at("runA/train_log.csv"));
  CHECK(log_a.rfind("epoch,train_loss,train_acc,val_loss,val_acc,lr\n", 0) ==
        0);
  CHECK(count_lines(log_a) == 5);  // header + 4 epochs

  const CmdResult b = run_cli(common + at("runB") + "\"");
  CHECK(b.exit_code == 0);
  CHECK(read_text(at("runB/train_log.csv")) == log_a);

  // Checkpoints agree on every tensor and on the optimizer state; only the
  // config echo differs (out.dir).
  const Checkpoint ca = read_checkpoint(at("runA/checkpoint.avck"));
  const Checkpoint cb = read_checkpoint(at("runB/checkpoint.avck"));
  REQUIRE(ca.tensors.size() == cb.tensors.size());
  for (size_t t = 0; t < ca.tensors.size(); ++t) {
    CHECK(ca.tensors[t].name == cb.tensors[t].name);
    CHECK(ca.tensors[t].values == cb.tensors[t].values);
  }
  CHECK(ca.has_optimizer);
  CHECK(ca.optimizer_step == cb.optimizer_step);
  CHECK(ca.moment1 == cb.moment1);
  CHECK(ca.moment2 == cb.moment2);
}

TEST_CASE("cli: lr zero freezes parameters") {
  const std::string common = std::string("train ") + kSmall +
                             "--frontend pcen --lr 0 --seed 3 "
                             "--manifest synth=\"" +
                             at("corpus/manifest.csv") + "\" --out \"";
  const CmdResult one = run_cli(common + at("frozen1") + "\" --epochs 1");
  CAPTURE(one.output);
  CHECK(one.exit_code == 0);
  const CmdResult three = run_cli(common + at("frozen3") + "\" --epochs 3");
  CHECK(three.exit_code == 0);

  const Checkpoint c1 = read_checkpoint(at("frozen1/checkpoint.avck"));
  const Checkpoint c3 = read_checkpoint(at("frozen3/checkpoint.avck"));
  REQUIRE(c1.tensors.size() == c3.tensors.size());
  for (size_t t = 0; t < c1.tensors.size(); ++t) {
    CHECK(c1.tensors[t].values == c3.tensors[t].values);
  }
  CHECK(c1.optimizer_step == 0u);
  CHECK(c3.optimizer_step == 0u);
}

TEST_CASE("cli: eval reports accuracy and writes predictions") {
  const std::string args = std::string("eval ") + kSmall +
                           "--checkpoint \"" +
                           at("runA/checkpoint.avck") +
                           "\" --split test --seed 9 --manifest synth=\"" +
                           at("corpus/manifest.csv") + "\" --out \"" +
                           at("evalA") + "\"";
  const CmdResult r = run_cli(args);
  CAPTURE(r.output);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("test: n=4") != std::string::npos);
  const std::string preds = read_text(at("evalA/predictions.csv"));
  CHECK(preds.rfind("itemid,dataset,label,prob,pred\n", 0) == 0);
  CHECK(count_lines(preds) == 5);

  // The same checkpoint evaluated from runB gives byte-identical predictions.
  const std::string args_b = std::string("eval ") + kSmall +
                             "--checkpoint \"" +
                             at("runB/checkpoint.avck") +
                             "\" --split test --seed 9 --manifest synth=\"" +
                             at("corpus/manifest.csv") + "\" --out \"" +
                             at("evalB") + "\"";
  const CmdResult rb = run_cli(args_b);
  CHECK(rb.exit_code == 0);
  CHECK(read_text(at("evalB/predictions.csv")) == preds);

  const CmdResult bad_split = run_cli(std::string("eval ") + kSmall +
                                      "--checkpoint \"" +
                                      at("runA/checkpoint.avck") +
                                      "\" --split bogus --manifest synth=\"" +
                                      at("corpus/manifest.csv") + "\"");
  CHECK(bad_split.exit_code == 2);
}

TEST_CASE("cli: compare finds identically trained systems tied") {
  const CmdResult r = run_cli(std::string("compare ") + kSmall +
                              "--system a=\"" +
                              at("runA/checkpoint.avck") + "\" --system b=\"" +
                              at("runB/checkpoint.avck") +
                              "\" --seed 9 --manifest synth=\"" +
                              at("corpus/manifest.csv") + "\" --out \"" +
                              at("cmp") + "\"");
  CAPTURE(r.output);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("Pairwise") != std::string::npos);
  CHECK(r.output.find("not significant") != std::string::npos);
  const std::string report_csv = read_text(at("cmp/report.csv"));
  CHECK(report_csv.rfind("system_a,system_b,scope,q,p,significant\n", 0) == 0);
  CHECK(fs::exists(at("cmp/report.txt")));
  const std::string acc_csv = read_text(at("cmp/accuracy.csv"));
  CHECK(acc_csv.find("a,") != std::string::npos);
  CHECK(acc_csv.find("b,") != std::string::npos);

  const CmdResult too_few = run_cli(std::string("compare ") + kSmall +
                                    "--system a=\"" +
                                    at("runA/checkpoint.avck") +
                                    "\" --manifest synth=\"" +
                                    at("corpus/manifest.csv") + "\"");
  CHECK(too_few.exit_code == 1);
}

TEST_CASE("cli: split prints per-cell counts") {
  const CmdResult r = run_cli(std::string("split ") + kSmall +
                              "--seed 1 --manifest synth=\"" +
                              at("corpus/manifest.csv") + "\" --out \"" +
                              at("splitout") + "\"");
  CAPTURE(r.output);
  CHECK(r.exit_code == 0);
  // 16 per (label) cell at 70:15:15 -> 12/2/2 with the leftover in train.
  CHECK(r.output.find("synth hasbird=0: train=12 val=2 test=2") !=
        std::string::npos);
  CHECK(r.output.find("synth hasbird=1: train=12 val=2 test=2") !=
        std::string::npos);
  CHECK(r.output.find("(32 items)") != std::string::npos);
  const std::string csv = read_text(at("splitout/split.csv"));
  CHECK(csv.rfind("itemid,dataset,split\n", 0) == 0);
  CHECK(count_lines(csv) == 33);
}

TEST_CASE("cli: gradcheck passes for learnable frontends only") {
  const CmdResult pcen = run_cli(std::string("gradcheck ") + kSmall +
                                 "--frontend pcen --seed 3");
  CAPTURE(pcen.output);
  CHECK(pcen.exit_code == 0);
  CHECK(pcen.output.find("pcen.log_alpha") != std::string::npos);
  CHECK(pcen.output.find("PASS") != std::string::npos);
  CHECK(pcen.output.find("FAIL") == std::string::npos);

  const CmdResult logmel = run_cli(std::string("gradcheck ") + kSmall +
                                   "--frontend logmel");
  CHECK(logmel.exit_code == 1);
  CHECK(logmel.output.find("no learnable parameters") != std::string::npos);
}
