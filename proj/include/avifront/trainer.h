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

#include "avifront/classifier.h"
#include "avifront/frontend.h"
#include "avifront/optim.h"

namespace avifront {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 8;
  double lr = 1e-3;
  int patience = 5;
  double min_delta = 1e-4;
  double lr_factor = 10.0;
  double lr_min = 1e-6;
  uint64_t seed = 0;
  /// Stop once validation accuracy reaches this value; <= 0 disables.
  double target_val_acc = -1.0;
};

struct EpochRow {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<EpochRow> history;
  int best_epoch = -1;
  double best_val_loss = 0.0;
  /// Parameter values at the best validation loss, in params order
  /// (frontend tensors first, then classifier).
  std::vector<std::vector<double>> best_params;
  /// ADAM moments and step count at the best epoch, same order.
  std::vector<std::vector<double>> best_moment1;
  std::vector<std::vector<double>> best_moment2;
  int64_t best_optimizer_step = 0;
  bool aborted = false;
  std::string abort_reason;
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<double> probs;
  std::vector<int> preds;
};

/// Combined optimizer parameter order: frontend tensors then classifier.
std::vector<ParamTensor*> training_params(Frontend& frontend, Classifier& clf);

/// Forward-only evaluation with decision threshold 0.5.
EvalResult evaluate(Frontend& frontend, Classifier& clf,
                    const std::vector<Waveform>& xs,
                    const std::vector<int>& ys);

/// Batched training: frontend forward -> classifier -> BCE -> backward
/// through the classifier then the frontend -> ADAM step per batch.
/// Gradients are averaged over the batch; clips are processed sequentially
/// in shuffled order so runs with the same seed are bit-identical. Fixed
/// frontends have their features computed once and reused across epochs.
/// On return the model holds the best-validation parameters.
TrainResult train_model(Frontend& frontend, Classifier& clf,
                        const std::vector<Waveform>& train_x,
                        const std::vector<int>& train_y,
                        const std::vector<Waveform>& val_x,
                        const std::vector<int>& val_y, const TrainConfig& cfg);

}  // namespace avifront
