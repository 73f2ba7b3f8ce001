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

#include <string>
#include <vector>

#include "avifront/config.h"

namespace avifront {

struct SystemSpec {
  std::string name;
  std::string checkpoint_path;
};

/// Extracts one feature file per manifest entry into the output directory
/// (per-dataset subfolders). Existing files are skipped unless force is set.
/// Returns 0, or 2 if any clip failed.
int cmd_extract(const RunConfig& rc, int jobs, bool force);

/// Trains frontend (when learnable) plus classifier; writes split.csv (when
/// computed), train_log.csv, checkpoint.avck, and config.txt.
int cmd_train(const RunConfig& rc);

/// Evaluates a checkpoint on one split of the configured manifests; writes
/// predictions.csv.
int cmd_eval(const RunConfig& rc, const std::string& checkpoint_path,
             const std::string& split_name);

/// Evaluates >= 2 named checkpoints on the shared test split, then runs the
/// bootstrap + ANOVA + Tukey significance pipeline. Writes accuracy.csv,
/// report.txt, and report.csv.
int cmd_compare(const RunConfig& rc, const std::vector<SystemSpec>& systems);

/// Finite-difference validation of the configured frontend's backward pass;
/// prints per-group max relative errors. Returns 0 iff all are below 1e-4.
int cmd_gradcheck(const RunConfig& rc);

/// Computes and writes the stratified split CSV.
int cmd_split(const RunConfig& rc);

/// Generates the synthetic corpus (WAV files plus manifest.csv).
int cmd_synth(const RunConfig& rc);

}  // namespace avifront
