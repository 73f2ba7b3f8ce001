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

#include <functional>
#include <string>
#include <vector>

#include "avifront/classifier.h"
#include "avifront/frontend.h"
#include "avifront/param.h"
#include "avifront/rng.h"

namespace avifront {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  size_t n_checked = 0;
};

/// Central finite differences against analytic gradients.
/// compute_grads() must zero the parameter grads, run forward + backward and
/// leave dLoss/dparam in each tensor; loss() must evaluate the same loss at
/// the current parameter values. Tensors larger than max_coords_per_tensor
/// are subsampled. Relative error is |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<void()>& compute_grads,
                           const std::vector<ParamTensor*>& params, double h,
                           size_t max_coords_per_tensor, Rng& rng);

/// Checks a learnable frontend's parameter gradients with the smooth probe
/// loss L = sum(weights * forward(w)), weights ~ N(0,1) seeded.
GradCheckReport frontend_grad_check(Frontend& frontend, const Waveform& w,
                                    uint64_t weight_seed, double h,
                                    size_t max_coords_per_tensor);

struct GroupGradCheck {
  std::string group;
  GradCheckReport report;
};

/// Same probe loss as frontend_grad_check, reported per parameter tensor.
std::vector<GroupGradCheck> frontend_grad_check_groups(
    Frontend& frontend, const Waveform& w, uint64_t weight_seed, double h,
    size_t max_coords_per_tensor);

/// Checks classifier parameter gradients under BCE loss on a fixed input.
GradCheckReport classifier_grad_check(Classifier& clf, const Grid3& input,
                                      int label, double h,
                                      size_t max_coords_per_tensor, Rng& rng);

}  // namespace avifront
