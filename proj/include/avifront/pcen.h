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

#include <vector>

#include "avifront/types.h"

namespace avifront {

/// PCEN(t,f) = (E(t,f) / (M(t,f) + eps)^alpha + delta)^r - delta^r with the
/// smoother M(t,f) = (1 - s) * M(t-1,f) + s * E(t,f), M(0,f) = E(0,f).
/// alpha, delta, r are per channel; s is per channel or a single scalar.
struct PcenParams {
  std::vector<double> alpha;  // >= 0
  std::vector<double> delta;  // > 0
  std::vector<double> r;      // in (0, 1]
  std::vector<double> s;      // in (0, 1]; size 1 means one global value
  double eps = 1e-6;          // > 0, fixed

  /// Uniform per-channel parameters at the library defaults.
  static PcenParams defaults(int n_channels, double alpha = 0.98,
                             double delta = 2.0, double r = 0.5,
                             double s = 0.04, double eps = 1e-6);
};

/// Validates PcenParams invariants against a channel count.
void validate_pcen_params(const PcenParams& p, int n_channels);

/// First-order IIR smoother along time (rows), per channel (columns).
/// s must have size 1 (global) or E.cols entries, each in (0, 1].
Grid2 pcen_smoother(const Grid2& E, const std::vector<double>& s);

/// Forward pass; if cache_M is non-null the smoothed grid is stored there for
/// the backward pass.
Grid2 pcen_forward(const Grid2& E, const PcenParams& p, Grid2* cache_M = nullptr);

/// Gradients with respect to the constrained parameter values and the input.
/// d_s has p.s.size() entries; the smoother recurrence is differentiated
/// through time without truncation.
struct PcenGrads {
  std::vector<double> d_alpha;
  std::vector<double> d_delta;
  std::vector<double> d_r;
  std::vector<double> d_s;
  Grid2 d_E;
};

PcenGrads pcen_backward(const Grid2& E, const Grid2& M, const PcenParams& p,
                        const Grid2& upstream);

}  // namespace avifront
