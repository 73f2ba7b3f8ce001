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

#include "avifront/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "avifront/loss.h"

namespace avifront {

GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<void()>& compute_grads,
                           const std::vector<ParamTensor*>& params, double h,
                           size_t max_coords_per_tensor, Rng& rng) {
  if (!(h >= 1e-7 && h <= 1e-3)) {
    throw ConfigError("grad_check: h must be in [1e-7, 1e-3]");
  }
  compute_grads();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const ParamTensor* p : params) analytic.push_back(p->grad);

  GradCheckReport report;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    ParamTensor& p = *params[pi];
    std::vector<size_t> coords(p.size());
    std::iota(coords.begin(), coords.end(), size_t{0});
    if (p.size() > max_coords_per_tensor) {
      rng.shuffle(coords);
      coords.resize(max_coords_per_tensor);
      std::sort(coords.begin(), coords.end());
    }
    for (size_t idx : coords) {
      const double backup = p.value[idx];
      p.value[idx] = backup + h;
      const double lp = loss();
      p.value[idx] = backup - h;
      const double lm = loss();
      p.value[idx] = backup;
      const double numeric = (lp - lm) / (2.0 * h);
      const double a = analytic[pi][idx];
      const double rel =
          std::abs(a - numeric) /
          std::max({std::abs(a), std::abs(numeric), 1e-8});
      ++report.n_checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = p.name;
        report.worst_index = idx;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

GradCheckReport frontend_grad_check(Frontend& frontend, const Waveform& w,
                                    uint64_t weight_seed, double h,
                                    size_t max_coords_per_tensor) {
  const std::vector<ParamTensor*> params = frontend.params();
  if (params.empty()) {
    throw ConfigError("frontend '" + to_string(frontend.kind()) +
                      "' has no learnable parameters");
  }
  const FeatureMap probe = frontend.forward(w);
  Grid3 weights(probe.values.channels, probe.values.rows, probe.values.cols);
  Rng wrng(weight_seed);
  for (double& x : weights.v) x = wrng.normal();

  auto loss = [&]() {
    const FeatureMap fm = frontend.forward(w);
    double acc = 0.0;
    for (size_t i = 0; i < fm.values.size(); ++i) {
      acc += weights.v[i] * fm.values.v[i];
    }
    return acc;
  };
  auto compute_grads = [&]() {
    for (ParamTensor* p : frontend.params()) p->zero_grad();
    frontend.forward(w);
    frontend.backward(weights);
  };
  Rng coord_rng(wrng.fork(1));
  return grad_check(loss, compute_grads, params, h, max_coords_per_tensor,
                    coord_rng);
}

std::vector<GroupGradCheck> frontend_grad_check_groups(
    Frontend& frontend, const Waveform& w, uint64_t weight_seed, double h,
    size_t max_coords_per_tensor) {
  const std::vector<ParamTensor*> params = frontend.params();
  if (params.empty()) {
    throw ConfigError("frontend '" + to_string(frontend.kind()) +
                      "' has no learnable parameters");
  }
  const FeatureMap probe = frontend.forward(w);
  Grid3 weights(probe.values.channels, probe.values.rows, probe.values.cols);
  Rng wrng(weight_seed);
  for (double& x : weights.v) x = wrng.normal();

  auto loss = [&]() {
    const FeatureMap fm = frontend.forward(w);
    double acc = 0.0;
    for (size_t i = 0; i < fm.values.size(); ++i) {
      acc += weights.v[i] * fm.values.v[i];
    }
    return acc;
  };
  auto compute_grads = [&]() {
    for (ParamTensor* p : frontend.params()) p->zero_grad();
    frontend.forward(w);
    frontend.backward(weights);
  };
  Rng coord_rng(wrng.fork(1));
  std::vector<GroupGradCheck> groups;
  for (ParamTensor* p : params) {
    GroupGradCheck g;
    g.group = p->name;
    g.report = grad_check(loss, compute_grads, {p}, h, max_coords_per_tensor,
                          coord_rng);
    groups.push_back(std::move(g));
  }
  return groups;
}

GradCheckReport classifier_grad_check(Classifier& clf, const Grid3& input,
                                      int label, double h,
                                      size_t max_coords_per_tensor, Rng& rng) {
  auto loss = [&]() { return bce_loss(clf.forward(input), label).loss; };
  auto compute_grads = [&]() {
    for (ParamTensor* p : clf.params()) p->zero_grad();
    const double logit = clf.forward(input);
    clf.backward(bce_loss(logit, label).dlogit);
  };
  return grad_check(loss, compute_grads, clf.params(), h,
                    max_coords_per_tensor, rng);
}

}  // namespace avifront
