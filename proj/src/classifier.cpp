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

#include "avifront/classifier.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "avifront/rng.h"

namespace avifront {

void validate_classifier_config(const ClassifierConfig& cfg) {
  if (cfg.input_channels < 1) {
    throw ConfigError("classifier: input_channels must be >= 1");
  }
  if (cfg.channels.empty()) {
    throw ConfigError("classifier: need at least one block");
  }
  for (int c : cfg.channels) {
    if (c < 1) throw ConfigError("classifier: block channels must be >= 1");
  }
  if (cfg.kernel_size < 1 || cfg.kernel_size % 2 == 0) {
    throw ConfigError("classifier: kernel_size must be odd and >= 1");
  }
  if (!(cfg.norm_eps > 0.0)) {
    throw ConfigError("classifier: norm_eps must be positive");
  }
}

Classifier::Classifier(const ClassifierConfig& cfg, uint64_t seed) : cfg_(cfg) {
  validate_classifier_config(cfg);
  Rng rng(seed);
  const int k = cfg.kernel_size;
  int in_c = cfg.input_channels;
  for (int b = 0; b < cfg.n_blocks(); ++b) {
    const int out_c = cfg.channels[b];
    ParamTensor w("clf.conv" + std::to_string(b) + ".w", {out_c, in_c, k, k});
    const double scale = std::sqrt(2.0 / (in_c * k * k));
    for (double& x : w.value) x = rng.normal(0.0, scale);
    conv_w_.push_back(std::move(w));
    conv_b_.emplace_back("clf.conv" + std::to_string(b) + ".b",
                         std::vector<int>{out_c});
    in_c = out_c;
  }
  head_w_ = ParamTensor("clf.head.w", {in_c});
  const double scale = std::sqrt(1.0 / in_c);
  for (double& x : head_w_.value) x = rng.normal(0.0, scale);
  head_b_ = ParamTensor("clf.head.b", {1});
}

std::vector<ParamTensor*> Classifier::params() {
  std::vector<ParamTensor*> out;
  for (size_t b = 0; b < conv_w_.size(); ++b) {
    out.push_back(&conv_w_[b]);
    out.push_back(&conv_b_[b]);
  }
  out.push_back(&head_w_);
  out.push_back(&head_b_);
  return out;
}

Grid3 Classifier::conv_forward(const Grid3& x, const ParamTensor& w,
                               const ParamTensor& b) const {
  const int out_c = w.shape[0];
  const int in_c = w.shape[1];
  const int k = w.shape[2];
  const int pad = k / 2;
  Grid3 z(out_c, x.rows, x.cols);
  for (int o = 0; o < out_c; ++o) {
    for (int t = 0; t < x.rows; ++t) {
      for (int f = 0; f < x.cols; ++f) {
        double acc = b.value[o];
        for (int i = 0; i < in_c; ++i) {
          for (int dt = 0; dt < k; ++dt) {
            const int tt = t + dt - pad;
            if (tt < 0 || tt >= x.rows) continue;
            const size_t wrow =
                ((static_cast<size_t>(o) * in_c + i) * k + dt) * k;
            const size_t xrow = (static_cast<size_t>(i) * x.rows + tt) * x.cols;
            for (int df = 0; df < k; ++df) {
              const int ff = f + df - pad;
              if (ff < 0 || ff >= x.cols) continue;
              acc += w.value[wrow + df] * x.v[xrow + ff];
            }
          }
        }
        z.at(o, t, f) = acc;
      }
    }
  }
  return z;
}

Grid3 Classifier::conv_backward(const Grid3& x, const Grid3& dz,
                                ParamTensor& w, ParamTensor& b) const {
  const int out_c = w.shape[0];
  const int in_c = w.shape[1];
  const int k = w.shape[2];
  const int pad = k / 2;
  Grid3 dx(in_c, x.rows, x.cols);
  for (int o = 0; o < out_c; ++o) {
    for (int t = 0; t < x.rows; ++t) {
      for (int f = 0; f < x.cols; ++f) {
        const double g = dz.at(o, t, f);
        if (g == 0.0) continue;
        b.grad[o] += g;
        for (int i = 0; i < in_c; ++i) {
          for (int dt = 0; dt < k; ++dt) {
            const int tt = t + dt - pad;
            if (tt < 0 || tt >= x.rows) continue;
            const size_t wrow =
                ((static_cast<size_t>(o) * in_c + i) * k + dt) * k;
            const size_t xrow = (static_cast<size_t>(i) * x.rows + tt) * x.cols;
            for (int df = 0; df < k; ++df) {
              const int ff = f + df - pad;
              if (ff < 0 || ff >= x.cols) continue;
              w.grad[wrow + df] += g * x.v[xrow + ff];
              dx.v[xrow + ff] += g * w.value[wrow + df];
            }
          }
        }
      }
    }
  }
  return dx;
}

double Classifier::forward(const Grid3& features) {
  if (features.channels != cfg_.input_channels) {
    throw ConfigError("classifier: expected " +
                      std::to_string(cfg_.input_channels) +
                      " input channels, got " +
                      std::to_string(features.channels));
  }
  if (features.rows < 1 || features.cols < 1) {
    throw ConfigError("classifier: empty feature map");
  }
  raw_input_ = features;
  kink_margin_ = std::numeric_limits<double>::infinity();

  std_input_ = features;
  norm_mu_.assign(features.channels, 0.0);
  norm_sigma_.assign(features.channels, 1.0);
  if (cfg_.standardize_input) {
    const size_t plane = static_cast<size_t>(features.rows) * features.cols;
    for (int c = 0; c < features.channels; ++c) {
      double* p = &std_input_.v[c * plane];
      double mu = 0.0;
      for (size_t i = 0; i < plane; ++i) mu += p[i];
      mu /= static_cast<double>(plane);
      double var = 0.0;
      for (size_t i = 0; i < plane; ++i) var += (p[i] - mu) * (p[i] - mu);
      var /= static_cast<double>(plane);
      const double sigma = std::sqrt(var + cfg_.norm_eps);
      for (size_t i = 0; i < plane; ++i) p[i] = (p[i] - mu) / sigma;
      norm_mu_[c] = mu;
      norm_sigma_[c] = sigma;
    }
  }

  blocks_.assign(cfg_.n_blocks(), {});
  const Grid3* cur = &std_input_;
  for (int b = 0; b < cfg_.n_blocks(); ++b) {
    BlockCache& cache = blocks_[b];
    cache.input = *cur;
    cache.pre = conv_forward(cache.input, conv_w_[b], conv_b_[b]);
    cache.activated = cache.pre;
    if (cfg_.use_relu) {
      for (double& x : cache.activated.v) {
        // Without pooling every unit's kink is at 0. With pooling only the
        // window maximum matters; its margin is handled below on pre values.
        if (!cfg_.use_maxpool) {
          kink_margin_ = std::min(kink_margin_, std::abs(x));
        }
        if (x < 0.0) x = 0.0;
      }
    }
    if (cfg_.use_maxpool) {
      const Grid3& a = cache.activated;
      const int out_r = a.rows >= 2 ? a.rows / 2 : 1;
      const int out_cl = a.cols >= 2 ? a.cols / 2 : 1;
      cache.pooled = Grid3(a.channels, out_r, out_cl);
      cache.argmax.assign(cache.pooled.size(), 0);
      size_t idx = 0;
      for (int c = 0; c < a.channels; ++c) {
        for (int t = 0; t < out_r; ++t) {
          for (int f = 0; f < out_cl; ++f, ++idx) {
            const int t0 = a.rows >= 2 ? 2 * t : 0;
            const int t1 = a.rows >= 2 ? 2 * t + 1 : 0;
            const int f0 = a.cols >= 2 ? 2 * f : 0;
            const int f1 = a.cols >= 2 ? 2 * f + 1 : 0;
            double best = -std::numeric_limits<double>::infinity();
            int best_at = 0;
            double best_pre = best;
            double second_pre = best;
            for (int tt = t0; tt <= t1; ++tt) {
              for (int ff = f0; ff <= f1; ++ff) {
                const int flat = (c * a.rows + tt) * a.cols + ff;
                if (a.v[flat] > best) {
                  best = a.v[flat];
                  best_at = flat;
                }
                const double p = cache.pre.v[flat];
                if (p > best_pre) {
                  second_pre = best_pre;
                  best_pre = p;
                } else if (p > second_pre) {
                  second_pre = p;
                }
              }
            }
            // relu(max(pre)) kinks where the window maximum crosses 0 and
            // where the argmax switches while positive; clamped ties are
            // flat, not kinks.
            if (cfg_.use_relu) {
              kink_margin_ = std::min(kink_margin_, std::abs(best_pre));
              if (best_pre > 0.0 && std::isfinite(second_pre)) {
                kink_margin_ =
                    std::min(kink_margin_, best_pre - second_pre);
              }
            } else if (std::isfinite(second_pre)) {
              kink_margin_ = std::min(kink_margin_, best_pre - second_pre);
            }
            cache.pooled.at(c, t, f) = best;
            cache.argmax[idx] = best_at;
          }
        }
      }
    } else {
      cache.pooled = cache.activated;
    }
    cur = &cache.pooled;
  }

  const Grid3& last = blocks_.back().pooled;
  const size_t plane = static_cast<size_t>(last.rows) * last.cols;
  gap_.assign(last.channels, 0.0);
  for (int c = 0; c < last.channels; ++c) {
    double acc = 0.0;
    for (size_t i = 0; i < plane; ++i) acc += last.v[c * plane + i];
    gap_[c] = acc / static_cast<double>(plane);
  }
  double logit = head_b_.value[0];
  for (int c = 0; c < last.channels; ++c) logit += head_w_.value[c] * gap_[c];
  has_cache_ = true;
  return logit;
}

Grid3 Classifier::backward(double dlogit) {
  if (!has_cache_) {
    throw ConfigError("classifier backward: no cached forward pass");
  }
  const Grid3& last = blocks_.back().pooled;
  const size_t plane = static_cast<size_t>(last.rows) * last.cols;
  head_b_.grad[0] += dlogit;
  Grid3 dcur(last.channels, last.rows, last.cols);
  for (int c = 0; c < last.channels; ++c) {
    head_w_.grad[c] += dlogit * gap_[c];
    const double spread = dlogit * head_w_.value[c] / static_cast<double>(plane);
    for (size_t i = 0; i < plane; ++i) dcur.v[c * plane + i] = spread;
  }

  for (int b = cfg_.n_blocks() - 1; b >= 0; --b) {
    BlockCache& cache = blocks_[b];
    Grid3 dact;
    if (cfg_.use_maxpool) {
      dact = Grid3(cache.activated.channels, cache.activated.rows,
                   cache.activated.cols);
      for (size_t i = 0; i < dcur.size(); ++i) {
        dact.v[cache.argmax[i]] += dcur.v[i];
      }
    } else {
      dact = dcur;
    }
    if (cfg_.use_relu) {
      for (size_t i = 0; i < dact.size(); ++i) {
        if (cache.pre.v[i] <= 0.0) dact.v[i] = 0.0;
      }
    }
    dcur = conv_backward(cache.input, dact, conv_w_[b], conv_b_[b]);
  }

  if (cfg_.standardize_input) {
    // Backprop through y = (x - mu) / sigma with mu, sigma computed from x:
    // dx = (g - mean(g) - y * mean(g * y)) / sigma, per channel.
    const size_t cplane = static_cast<size_t>(raw_input_.rows) * raw_input_.cols;
    for (int c = 0; c < raw_input_.channels; ++c) {
      double* g = &dcur.v[c * cplane];
      const double* y = &std_input_.v[c * cplane];
      double mean_g = 0.0, mean_gy = 0.0;
      for (size_t i = 0; i < cplane; ++i) {
        mean_g += g[i];
        mean_gy += g[i] * y[i];
      }
      mean_g /= static_cast<double>(cplane);
      mean_gy /= static_cast<double>(cplane);
      const double inv_sigma = 1.0 / norm_sigma_[c];
      for (size_t i = 0; i < cplane; ++i) {
        g[i] = (g[i] - mean_g - y[i] * mean_gy) * inv_sigma;
      }
    }
  }
  return dcur;
}

}  // namespace avifront
