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

#include <algorithm>
#include <cmath>

#include "avifront/param.h"
#include "avifront/types.h"

namespace avifront {

struct BceResult {
  double loss = 0.0;
  double dlogit = 0.0;
};

/// Numerically stable binary cross-entropy on a logit:
/// loss = max(z, 0) - z*y + ln(1 + exp(-|z|)), dlogit = sigmoid(z) - y.
inline BceResult bce_loss(double logit, int label) {
  if (label != 0 && label != 1) {
    throw ConfigError("bce_loss: label must be 0 or 1");
  }
  BceResult r;
  r.loss = std::max(logit, 0.0) - logit * label +
           std::log1p(std::exp(-std::abs(logit)));
  r.dlogit = sigmoid(logit) - label;
  return r;
}

}  // namespace avifront
