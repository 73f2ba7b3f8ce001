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
#include <vector>

#include "avifront/param.h"

namespace avifront {

/// ADAM with bias correction. step() consumes and zeroes the accumulated
/// gradients.
class Adam {
 public:
  Adam(std::vector<ParamTensor*> params, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);

  void step();
  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  int64_t step_count() const { return t_; }

  const std::vector<ParamTensor*>& params() const { return params_; }
  std::vector<std::vector<double>>& moment1() { return m_; }
  std::vector<std::vector<double>>& moment2() { return v_; }
  void set_step_count(int64_t t) { t_ = t; }

 private:
  std::vector<ParamTensor*> params_;
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Divides the learning rate by `factor` once the best validation loss has
/// not improved by more than min_delta for `patience` consecutive epochs.
class PlateauScheduler {
 public:
  PlateauScheduler(double factor = 10.0, int patience = 5,
                   double min_delta = 1e-4, double lr_min = 1e-6);

  /// Feeds one epoch's validation loss; returns the (possibly reduced) rate.
  double update(double val_loss, double current_lr);

 private:
  double factor_;
  int patience_;
  double min_delta_;
  double lr_min_;
  double best_;
  int stale_epochs_ = 0;
};

}  // namespace avifront
