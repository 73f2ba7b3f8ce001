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

#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "avifront/commands.h"

namespace {

using avifront::ConfigError;
using avifront::DataError;
using avifront::KeyValueConfig;
using avifront::RunConfig;

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> overrides;
  std::vector<std::string> manifests;
  std::string frontend;
  std::string out_dir;
  std::string audio_root;
  std::string split_file;
  int64_t seed = -1;
  double lr = -1.0;
  int epochs = -1;
  bool print_config = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config_path,
                  "Config file (INI-style key=value sections)");
  cmd->add_option("--set", flags->overrides,
                  "Override a config key, e.g. --set dsp.n_mels=41")
      ->take_all();
  cmd->add_option("--manifest", flags->manifests,
                  "Dataset manifest as name=path (repeatable)")
      ->take_all();
  cmd->add_option("--frontend", flags->frontend,
                  "Frontend kind: spect|mel|logmel|strf|td|pcen|leaf");
  cmd->add_option("--out", flags->out_dir, "Output directory");
  cmd->add_option("--audio-root", flags->audio_root,
                  "Audio root (default: $AVIFRONT_DATA_ROOT or beside the "
                  "manifest)");
  cmd->add_option("--split-file", flags->split_file,
                  "Existing split CSV instead of computing one");
  cmd->add_option("--seed", flags->seed, "Training/stats seed");
  cmd->add_option("--lr", flags->lr, "Initial learning rate");
  cmd->add_option("--epochs", flags->epochs, "Max training epochs");
  cmd->add_flag("--print-config", flags->print_config,
                "Print the resolved configuration and exit");
}

RunConfig resolve(const CommonFlags& flags) {
  KeyValueConfig kv;
  if (!flags.config_path.empty()) {
    kv = avifront::load_config_file(flags.config_path);
  }
  for (const auto& item : flags.overrides) {
    const size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--set expects key=value, got '" + item + "'");
    }
    kv.set(item.substr(0, eq), item.substr(eq + 1));
  }
  if (!flags.frontend.empty()) kv.set("frontend.kind", flags.frontend);
  if (!flags.out_dir.empty()) kv.set("out.dir", flags.out_dir);
  if (!flags.audio_root.empty()) kv.set("data.audio_root", flags.audio_root);
  if (!flags.split_file.empty()) kv.set("split.file", flags.split_file);
  if (flags.seed >= 0) {
    kv.set("train.seed", std::to_string(flags.seed));
    kv.set("split.seed", std::to_string(flags.seed));
    kv.set("synth.seed", std::to_string(flags.seed));
  }
  if (flags.lr >= 0.0) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", flags.lr);
    kv.set("train.lr", buf);
  }
  if (flags.epochs >= 0) kv.set("train.epochs", std::to_string(flags.epochs));
  return avifront::resolve_run_config(kv, flags.manifests);
}

/// Shared prologue: resolve, honor --print-config, then run the command.
int dispatch(const CommonFlags& flags,
             const std::function<int(const RunConfig&)>& run) {
  const RunConfig rc = resolve(flags);
  if (flags.print_config) {
    std::cout << rc.render();
    return 0;
  }
  return run(rc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "avifront: acoustic frontends for bird activity detection "
      "(extraction, training, evaluation, comparison)"};
  app.require_subcommand(1);

  CommonFlags extract_flags;
  int jobs = 1;
  bool force = false;
  CLI::App* extract =
      app.add_subcommand("extract", "Extract feature files for a manifest");
  add_common_flags(extract, &extract_flags);
  extract->add_option("--jobs", jobs, "Parallel extraction workers");
  extract->add_flag("--force", force, "Overwrite existing feature files");

  CommonFlags train_flags;
  CLI::App* train =
      app.add_subcommand("train", "Train a frontend + classifier");
  add_common_flags(train, &train_flags);

  CommonFlags eval_flags;
  std::string checkpoint = "out/checkpoint.avck";
  std::string split_name = "test";
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Evaluate a checkpoint on one split");
  add_common_flags(eval_cmd, &eval_flags);
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint path");
  eval_cmd->add_option("--split", split_name, "Split: train|val|test");

  CommonFlags compare_flags;
  std::vector<std::string> system_specs;
  CLI::App* compare = app.add_subcommand(
      "compare", "Compare trained systems with significance tests");
  add_common_flags(compare, &compare_flags);
  compare
      ->add_option("--system", system_specs,
                   "System as name=checkpoint.avck (repeat, >= 2)")
      ->take_all();

  CommonFlags gradcheck_flags;
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "Finite-difference check of frontend gradients");
  add_common_flags(gradcheck, &gradcheck_flags);

  CommonFlags split_flags;
  CLI::App* split_cmd =
      app.add_subcommand("split", "Compute the stratified 70:15:15 split");
  add_common_flags(split_cmd, &split_flags);

  CommonFlags synth_flags;
  CLI::App* synth =
      app.add_subcommand("synth", "Generate the synthetic chirp corpus");
  add_common_flags(synth, &synth_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (extract->parsed()) {
      return dispatch(extract_flags, [&](const RunConfig& rc) {
        return avifront::cmd_extract(rc, jobs, force);
      });
    }
    if (train->parsed()) {
      return dispatch(train_flags, avifront::cmd_train);
    }
    if (eval_cmd->parsed()) {
      return dispatch(eval_flags, [&](const RunConfig& rc) {
        return avifront::cmd_eval(rc, checkpoint, split_name);
      });
    }
    if (compare->parsed()) {
      return dispatch(compare_flags, [&](const RunConfig& rc) {
        std::vector<avifront::SystemSpec> systems;
        for (const auto& spec : system_specs) {
          const size_t eq = spec.find('=');
          if (eq == std::string::npos || eq == 0) {
            throw ConfigError("--system expects name=checkpoint, got '" +
                              spec + "'");
          }
          systems.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
        }
        return avifront::cmd_compare(rc, systems);
      });
    }
    if (gradcheck->parsed()) {
      return dispatch(gradcheck_flags, avifront::cmd_gradcheck);
    }
    if (split_cmd->parsed()) {
      return dispatch(split_flags, avifront::cmd_split);
    }
    if (synth->parsed()) {
      return dispatch(synth_flags, avifront::cmd_synth);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
