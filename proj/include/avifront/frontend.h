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

#include <memory>
#include <string>
#include <vector>

#include "avifront/dsp.h"
#include "avifront/gabor.h"
#include "avifront/param.h"
#include "avifront/pcen.h"
#include "avifront/types.h"

namespace avifront {

enum class FrontendKind { Spect, Mel, Logmel, Strf, Td, Pcen, Leaf };

std::string to_string(FrontendKind kind);
FrontendKind frontend_kind_from_string(const std::string& name);
bool frontend_is_learnable(FrontendKind kind);

struct FrontendConfig {
  int sample_rate_hz = 44100;  // binds TD/LEAF kernel and stride lengths
  double win_len_s = 0.01;
  double overlap = 0.75;
  int n_mels = 41;
  double f_min_hz = 500.0;
  double f_max_hz = 16000.0;
  double log_floor_eps = 1e-10;

  int strf_n_filters = 64;
  int strf_half_t = 5;
  int strf_half_f = 5;

  int n_filters = 40;           // TD and LEAF banks
  double kernel_len_s = 0.025;  // rounded to the nearest odd sample count

  double pcen_alpha = 0.98;
  double pcen_delta = 2.0;
  double pcen_r = 0.5;
  double pcen_s = 0.04;
  double pcen_eps = 1e-6;
  bool pcen_learn_s = false;

  /// Window length in samples at the configured rate.
  int win_len() const { return static_cast<int>(win_len_s * sample_rate_hz); }
  /// Frame hop in samples, shared by all frontends as the pooling stride.
  int hop() const;
  /// TD/LEAF kernel length in samples (odd).
  int kernel_len() const;
};

void validate_frontend_config(const FrontendConfig& cfg);

/// One frontend behind a uniform interface. Learnable frontends cache
/// activations in forward() for the following backward(), so an instance must
/// not be shared across threads while training; fixed frontends are pure.
class Frontend {
 public:
  virtual ~Frontend() = default;
  virtual FrontendKind kind() const = 0;
  virtual FeatureMap forward(const Waveform& w) = 0;
  /// Accumulates dLoss/dparam into params() grads; gradients are reported
  /// with respect to the unconstrained internal parameters.
  virtual void backward(const Grid3& upstream);
  virtual std::vector<ParamTensor*> params() { return {}; }
  virtual bool learnable() const { return false; }
};

std::unique_ptr<Frontend> make_frontend(FrontendKind kind,
                                        const FrontendConfig& cfg,
                                        uint64_t seed);

/// One-shot forward dispatch.
FeatureMap frontend_forward(FrontendKind kind, const Waveform& w,
                            const FrontendConfig& cfg, uint64_t seed);

/// Shared fixed stage: Hann power spectrogram and mel filterbank, with the
/// filterbank rebuilt only when the sample rate changes.
class MelStage {
 public:
  explicit MelStage(const FrontendConfig& cfg) : cfg_(cfg) {}
  PowerSpectrogram spect(const Waveform& w) const;
  MelSpectrogram mel(const Waveform& w);
  const MelFilterbank& filterbank(int sample_rate_hz, int n_bins);

 private:
  FrontendConfig cfg_;
  MelFilterbank fb_;
  int fb_rate_ = 0;
  int fb_bins_ = 0;
};

class SpectFrontend : public Frontend {
 public:
  explicit SpectFrontend(const FrontendConfig& cfg) : cfg_(cfg) {}
  FrontendKind kind() const override { return FrontendKind::Spect; }
  FeatureMap forward(const Waveform& w) override;

 private:
  FrontendConfig cfg_;
};

class MelFrontend : public Frontend {
 public:
  explicit MelFrontend(const FrontendConfig& cfg) : stage_(cfg) {}
  FrontendKind kind() const override { return FrontendKind::Mel; }
  FeatureMap forward(const Waveform& w) override;

 private:
  MelStage stage_;
};

class LogmelFrontend : public Frontend {
 public:
  explicit LogmelFrontend(const FrontendConfig& cfg)
      : stage_(cfg), floor_eps_(cfg.log_floor_eps) {}
  FrontendKind kind() const override { return FrontendKind::Logmel; }
  FeatureMap forward(const Waveform& w) override;

 private:
  MelStage stage_;
  double floor_eps_;
};

/// Bank of 2-D Gabor filters convolved with the mel spectrogram (real part,
/// same-size zero-padded convolution); one output channel per filter.
class StrfFrontend : public Frontend {
 public:
  StrfFrontend(const FrontendConfig& cfg, uint64_t seed);
  FrontendKind kind() const override { return FrontendKind::Strf; }
  FeatureMap forward(const Waveform& w) override;
  FeatureMap forward_mel(const MelSpectrogram& E);
  void backward(const Grid3& upstream) override;
  std::vector<ParamTensor*> params() override;
  bool learnable() const override { return true; }

  Strf2dFilterParams filter_params(int k) const;

 private:
  FrontendConfig cfg_;
  MelStage stage_;
  ParamTensor F_, gamma_, log_sigma_t_, log_sigma_f_;
  Grid2 cached_E_;
  bool has_cache_ = false;
};

/// Time-domain filterbank: unconstrained FIR taps, squared output,
/// squared-Hann pooling subsampled by the frame hop.
class TdFrontend : public Frontend {
 public:
  TdFrontend(const FrontendConfig& cfg, uint64_t seed);
  FrontendKind kind() const override { return FrontendKind::Td; }
  FeatureMap forward(const Waveform& w) override;
  void backward(const Grid3& upstream) override;
  std::vector<ParamTensor*> params() override;
  bool learnable() const override { return true; }

  const ParamTensor& taps() const { return taps_; }
  int kernel_len() const { return kernel_len_; }
  int stride() const { return stride_; }
  const std::vector<double>& pool_window() const { return pool_; }

 private:
  FrontendConfig cfg_;
  int kernel_len_ = 0;
  int stride_ = 0;
  ParamTensor taps_;  // [n_filters x kernel_len]
  std::vector<double> pool_;
  // forward cache
  std::vector<double> cached_x_;
  std::vector<std::vector<double>> cached_y_;
  bool has_cache_ = false;
};

/// PCEN over the fixed mel spectrogram with per-channel learnable
/// compression (alpha, delta, r via reparameterization; s optional).
class PcenFrontend : public Frontend {
 public:
  PcenFrontend(const FrontendConfig& cfg, uint64_t seed);
  FrontendKind kind() const override { return FrontendKind::Pcen; }
  FeatureMap forward(const Waveform& w) override;
  void backward(const Grid3& upstream) override;
  std::vector<ParamTensor*> params() override;
  bool learnable() const override { return true; }

  PcenParams constrained() const;

 private:
  FrontendConfig cfg_;
  MelStage stage_;
  ParamTensor log_alpha_, log_delta_, logit_r_, logit_s_;
  Grid2 cached_E_, cached_M_;
  bool has_cache_ = false;
};

/// Complex 1-D Gabor convolution, squared modulus, per-filter Gaussian
/// low-pass pooling, then PCEN.
class LeafFrontend : public Frontend {
 public:
  LeafFrontend(const FrontendConfig& cfg, uint64_t seed);
  FrontendKind kind() const override { return FrontendKind::Leaf; }
  FeatureMap forward(const Waveform& w) override;
  void backward(const Grid3& upstream) override;
  std::vector<ParamTensor*> params() override;
  bool learnable() const override { return true; }

  /// Pre-PCEN pooled band energies (diagnostic path, no caching).
  Grid2 band_energies(const Waveform& w);

  double eta(int n) const { return 0.5 * sigmoid(eta_raw_.value[n]); }
  double sigma_bw(int n) const { return std::exp(log_sigma_bw_.value[n]); }
  double sigma_lp(int n) const { return std::exp(log_sigma_lp_.value[n]); }
  int kernel_len() const { return kernel_len_; }
  int stride() const { return stride_; }
  PcenParams pcen_constrained() const;

 private:
  Grid2 compute_bands(const std::vector<double>& x, bool keep_cache);

  FrontendConfig cfg_;
  int kernel_len_ = 0;
  int stride_ = 0;
  ParamTensor eta_raw_, log_sigma_bw_, log_sigma_lp_;
  ParamTensor log_alpha_, log_delta_, logit_r_, logit_s_;
  // forward cache
  std::vector<double> cached_x_;
  std::vector<std::vector<double>> cached_yr_, cached_yi_;
  Grid2 cached_E_, cached_M_;
  bool has_cache_ = false;
};

}  // namespace avifront
