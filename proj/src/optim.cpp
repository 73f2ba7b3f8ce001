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

#include "avifront/optim.h"

#include <cmath>
#include <limits>

namespace avifront {

Adam::Adam(std::vector<ParamTensor*> params, double lr, double beta1,
           double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2),
      eps_(eps) {
  if (!(lr_ > 0.0)) throw ConfigError("adam: learning rate must be positive");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const ParamTensor* p : params_) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    ParamTensor& p = *params_[pi];
    std::vector<double>& m = m_[pi];
    std::vector<double>& v = v_[pi];
    for (size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
    p.zero_grad();
  }
}

PlateauScheduler::PlateauScheduler(double factor, int patience,
                                   double min_delta, double lr_min)
    : factor_(factor), patience_(patience), min_delta_(min_delta),
      lr_min_(lr_min), best_(std::numeric_limits<double>::infinity()) {
  if (!(factor_ > 1.0)) throw ConfigError("scheduler: factor must be > 1");
  if (patience_ < 1) throw ConfigError("scheduler: patience must be >= 1");
}

double PlateauScheduler::update(double val_loss, double current_lr) {
  if (val_loss < best_ - min_delta_) {
    best_ = val_loss;
    stale_epochs_ = 0;
    return current_lr;
  }
  ++stale_epochs_;
  if (stale_epochs_ >= patience_) {
    stale_epochs_ = 0;
    return std::max(lr_min_, current_lr / factor_);
  }
  return current_lr;
}

}  // namespace avifront
