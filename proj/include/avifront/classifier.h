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

#include "avifront/param.h"
#include "avifront/types.h"

namespace avifront {

/// Compact convolutional classifier: repeated [conv k x k -> ReLU ->
/// 2x2 max-pool] blocks, global average pooling, one logit. Inputs are
/// standardized per channel (zero mean, unit variance over time x band)
/// before the first block; the standardization is differentiated in
/// backward() so frontend gradients flow through it.
struct ClassifierConfig {
  int input_channels = 1;
  std::vector<int> channels = {16, 32, 64};
  int kernel_size = 3;  // odd
  bool use_maxpool = true;
  bool use_relu = true;
  bool standardize_input = true;
  double norm_eps = 1e-5;

  int n_blocks() const { return static_cast<int>(channels.size()); }
};

void validate_classifier_config(const ClassifierConfig& cfg);

class Classifier {
 public:
  Classifier(const ClassifierConfig& cfg, uint64_t seed);

  /// Returns the logit and caches activations for backward().
  double forward(const Grid3& features);

  /// Accumulates parameter gradients and returns dLoss/dfeatures.
  Grid3 backward(double dlogit);

  std::vector<ParamTensor*> params();
  const ClassifierConfig& config() const { return cfg_; }

  /// Smallest distance to a ReLU or max-pool decision boundary seen in the
  /// last forward pass. Finite-difference checks resample inputs when this
  /// is tiny, since a kink inside the probe step invalidates the comparison.
  double last_kink_margin() const { return kink_margin_; }

 private:
  struct BlockCache {
    Grid3 input;       // block input
    Grid3 pre;         // conv output, pre-activation
    Grid3 activated;   // after ReLU
    Grid3 pooled;      // after max-pool (block output)
    std::vector<int> argmax;  // flat index into `activated` per pooled cell
  };

  Grid3 conv_forward(const Grid3& x, const ParamTensor& w,
                     const ParamTensor& b) const;
  Grid3 conv_backward(const Grid3& x, const Grid3& dz, ParamTensor& w,
                      ParamTensor& b) const;

  ClassifierConfig cfg_;
  std::vector<ParamTensor> conv_w_, conv_b_;
  ParamTensor head_w_, head_b_;

  // forward cache
  Grid3 raw_input_;
  Grid3 std_input_;
  std::vector<double> norm_mu_, norm_sigma_;
  std::vector<BlockCache> blocks_;
  std::vector<double> gap_;
  double kink_margin_ = 0.0;
  bool has_cache_ = false;
};

}  // namespace avifront
