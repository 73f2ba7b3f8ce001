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

#include "avifront/frontend.h"

#include <algorithm>
#include <cmath>

#include "avifront/rng.h"

namespace avifront {
namespace {

std::vector<cplx> padded_fft_real(const std::vector<double>& x, size_t n) {
  std::vector<cplx> out(n);
  for (size_t i = 0; i < x.size(); ++i) out[i] = cplx(x[i], 0.0);
  fft_inplace(out, false);
  return out;
}

std::vector<cplx> padded_fft(const std::vector<cplx>& x, size_t n) {
  std::vector<cplx> out(n);
  std::copy(x.begin(), x.end(), out.begin());
  fft_inplace(out, false);
  return out;
}

/// Valid-mode true convolution y[i] = sum_j x[i+K-1-j] * k[j] for a length-Lx
/// input whose spectrum X (size fft_n >= Lx+K-1) is precomputed.
std::vector<cplx> valid_conv(const std::vector<cplx>& X, size_t fft_n,
                             const std::vector<cplx>& kernel, size_t Lx) {
  const size_t K = kernel.size();
  std::vector<cplx> buf = padded_fft(kernel, fft_n);
  for (size_t i = 0; i < fft_n; ++i) buf[i] *= X[i];
  fft_inplace(buf, true);
  return std::vector<cplx>(buf.begin() + (K - 1), buf.begin() + Lx);
}

/// cc[l] = sum_i conj(g[i]) * x[i+l] for l in [0, want); X (size fft_n >=
/// Lx + |g| - 1) is the input spectrum.
std::vector<cplx> corr_against_input(const std::vector<cplx>& X, size_t fft_n,
                                     const std::vector<cplx>& g, size_t want) {
  std::vector<cplx> buf = padded_fft(g, fft_n);
  for (size_t i = 0; i < fft_n; ++i) buf[i] = std::conj(buf[i]) * X[i];
  fft_inplace(buf, true);
  buf.resize(want);
  return buf;
}

Grid2 upstream_channel0(const Grid3& upstream, int rows, int cols,
                        const char* who) {
  if (upstream.channels != 1 || upstream.rows != rows ||
      upstream.cols != cols) {
    throw ConfigError(std::string(who) + ": upstream gradient shape mismatch");
  }
  Grid2 g(rows, cols);
  g.v = upstream.v;
  return g;
}

}  // namespace

void Frontend::backward(const Grid3&) {
  throw ConfigError("frontend '" + to_string(kind()) +
                    "' has no learnable parameters");
}

std::string to_string(FrontendKind kind) {
  switch (kind) {
    case FrontendKind::Spect: return "spect";
    case FrontendKind::Mel: return "mel";
    case FrontendKind::Logmel: return "logmel";
    case FrontendKind::Strf: return "strf";
    case FrontendKind::Td: return "td";
    case FrontendKind::Pcen: return "pcen";
    case FrontendKind::Leaf: return "leaf";
  }
  return "unknown";
}

FrontendKind frontend_kind_from_string(const std::string& name) {
  if (name == "spect") return FrontendKind::Spect;
  if (name == "mel") return FrontendKind::Mel;
  if (name == "logmel") return FrontendKind::Logmel;
  if (name == "strf") return FrontendKind::Strf;
  if (name == "td") return FrontendKind::Td;
  if (name == "pcen") return FrontendKind::Pcen;
  if (name == "leaf") return FrontendKind::Leaf;
  throw ConfigError("unknown frontend kind '" + name +
                    "' (expected spect|mel|logmel|strf|td|pcen|leaf)");
}

bool frontend_is_learnable(FrontendKind kind) {
  switch (kind) {
    case FrontendKind::Strf:
    case FrontendKind::Td:
    case FrontendKind::Pcen:
    case FrontendKind::Leaf:
      return true;
    default:
      return false;
  }
}

int FrontendConfig::hop() const {
  return std::max<int>(
      1, static_cast<int>(std::llround(win_len() * (1.0 - overlap))));
}

int FrontendConfig::kernel_len() const {
  int k = static_cast<int>(std::llround(kernel_len_s * sample_rate_hz));
  if (k % 2 == 0) ++k;
  return std::max(k, 3);
}

void validate_frontend_config(const FrontendConfig& cfg) {
  if (cfg.sample_rate_hz <= 0) throw ConfigError("config: sample_rate_hz must be positive");
  if (!(cfg.win_len_s > 0.0)) throw ConfigError("config: win_len_s must be positive");
  if (cfg.win_len() < 2) throw ConfigError("config: window shorter than 2 samples");
  if (cfg.overlap < 0.0 || cfg.overlap >= 1.0) {
    throw ConfigError("config: overlap must be in [0, 1)");
  }
  if (cfg.n_mels < 1) throw ConfigError("config: n_mels must be >= 1");
  if (!(cfg.f_min_hz > 0.0) || !(cfg.f_min_hz < cfg.f_max_hz)) {
    throw ConfigError("config: need 0 < f_min_hz < f_max_hz");
  }
  if (cfg.f_max_hz > 0.5 * cfg.sample_rate_hz) {
    throw ConfigError("config: f_max_hz exceeds Nyquist for sample_rate_hz");
  }
  if (!(cfg.log_floor_eps > 0.0)) throw ConfigError("config: log_floor_eps must be positive");
  if (cfg.strf_n_filters < 1) throw ConfigError("config: strf_n_filters must be >= 1");
  if (cfg.strf_half_t < 1 || cfg.strf_half_f < 1) {
    throw ConfigError("config: strf kernel half sizes must be >= 1");
  }
  if (cfg.n_filters < 1) throw ConfigError("config: n_filters must be >= 1");
  if (!(cfg.kernel_len_s > 0.0)) throw ConfigError("config: kernel_len_s must be positive");
  if (cfg.pcen_alpha < 0.0) throw ConfigError("config: pcen_alpha must be >= 0");
  if (!(cfg.pcen_delta > 0.0)) throw ConfigError("config: pcen_delta must be > 0");
  if (!(cfg.pcen_r > 0.0) || cfg.pcen_r > 1.0) {
    throw ConfigError("config: pcen_r must be in (0, 1]");
  }
  if (!(cfg.pcen_s > 0.0) || cfg.pcen_s > 1.0) {
    throw ConfigError("config: pcen_s must be in (0, 1]");
  }
  if (!(cfg.pcen_eps > 0.0)) throw ConfigError("config: pcen_eps must be > 0");
}

// -------------------------------------------------------------------------
// Fixed stage

PowerSpectrogram MelStage::spect(const Waveform& w) const {
  return power_spectrogram(w, cfg_.win_len_s, cfg_.overlap);
}

const MelFilterbank& MelStage::filterbank(int sample_rate_hz, int n_bins) {
  if (fb_rate_ != sample_rate_hz || fb_bins_ != n_bins) {
    const double fft_size = 2.0 * (n_bins - 1);
    fb_ = build_mel_filterbank(cfg_.n_mels, cfg_.f_min_hz, cfg_.f_max_hz,
                               n_bins, sample_rate_hz / fft_size);
    fb_rate_ = sample_rate_hz;
    fb_bins_ = n_bins;
  }
  return fb_;
}

MelSpectrogram MelStage::mel(const Waveform& w) {
  const PowerSpectrogram ps = spect(w);
  return apply_mel(ps, filterbank(w.sample_rate_hz, ps.n_bins()));
}

FeatureMap SpectFrontend::forward(const Waveform& w) {
  const PowerSpectrogram ps = power_spectrogram(w, cfg_.win_len_s, cfg_.overlap);
  FeatureMap fm;
  fm.values = Grid3(1, ps.n_frames(), ps.n_bins());
  fm.values.v = ps.values.v;
  fm.hop_s = ps.hop_s;
  return fm;
}

FeatureMap MelFrontend::forward(const Waveform& w) {
  const MelSpectrogram ms = stage_.mel(w);
  FeatureMap fm;
  fm.values = Grid3(1, ms.n_frames(), ms.n_mels());
  fm.values.v = ms.values.v;
  fm.hop_s = ms.hop_s;
  return fm;
}

FeatureMap LogmelFrontend::forward(const Waveform& w) {
  const MelSpectrogram ms = log_compress(stage_.mel(w), floor_eps_);
  FeatureMap fm;
  fm.values = Grid3(1, ms.n_frames(), ms.n_mels());
  fm.values.v = ms.values.v;
  fm.hop_s = ms.hop_s;
  return fm;
}

// -------------------------------------------------------------------------
// STRF

StrfFrontend::StrfFrontend(const FrontendConfig& cfg, uint64_t seed)
    : cfg_(cfg), stage_(cfg) {
  validate_frontend_config(cfg);
  const int n = cfg.strf_n_filters;
  F_ = ParamTensor("strf.F", {n});
  gamma_ = ParamTensor("strf.gamma", {n});
  log_sigma_t_ = ParamTensor("strf.log_sigma_t", {n});
  log_sigma_f_ = ParamTensor("strf.log_sigma_f", {n});
  Rng rng(seed);
  for (int k = 0; k < n; ++k) {
    F_.value[k] = rng.uniform(0.05, 0.45);
    gamma_.value[k] = rng.uniform(0.0, M_PI);
    log_sigma_t_.value[k] = std::log(rng.uniform(1.0, 4.0));
    log_sigma_f_.value[k] = std::log(rng.uniform(1.0, 4.0));
  }
}

std::vector<ParamTensor*> StrfFrontend::params() {
  return {&F_, &gamma_, &log_sigma_t_, &log_sigma_f_};
}

Strf2dFilterParams StrfFrontend::filter_params(int k) const {
  Strf2dFilterParams p;
  p.F = F_.value[k];
  p.gamma = gamma_.value[k];
  p.sigma_t = std::exp(log_sigma_t_.value[k]);
  p.sigma_f = std::exp(log_sigma_f_.value[k]);
  return p;
}

FeatureMap StrfFrontend::forward(const Waveform& w) {
  MelSpectrogram E = stage_.mel(w);
  return forward_mel(E);
}

FeatureMap StrfFrontend::forward_mel(const MelSpectrogram& E) {
  if (E.n_frames() == 0 || E.n_mels() == 0) {
    throw DataError("strf: empty mel spectrogram");
  }
  const int T = E.n_frames();
  const int B = E.n_mels();
  const int ht = cfg_.strf_half_t;
  const int hf = cfg_.strf_half_f;
  const int n = cfg_.strf_n_filters;

  FeatureMap fm;
  fm.values = Grid3(n, T, B);
  fm.hop_s = E.hop_s;
  for (int k = 0; k < n; ++k) {
    const CGrid2 kernel = gabor_kernel_2d(filter_params(k), ht, hf);
    for (int dt = -ht; dt <= ht; ++dt) {
      const int t0 = std::max(0, dt);
      const int t1 = std::min(T - 1, T - 1 + dt);
      for (int df = -hf; df <= hf; ++df) {
        const double g = kernel.at(dt + ht, df + hf).real();
        const int f0 = std::max(0, df);
        const int f1 = std::min(B - 1, B - 1 + df);
        for (int t = t0; t <= t1; ++t) {
          const double* e = &E.values.v[static_cast<size_t>(t - dt) * B + (f0 - df)];
          double* z = &fm.values.v[(static_cast<size_t>(k) * T + t) * B + f0];
          for (int f = 0; f <= f1 - f0; ++f) z[f] += g * e[f];
        }
      }
    }
  }
  cached_E_ = E.values;
  has_cache_ = true;
  return fm;
}

void StrfFrontend::backward(const Grid3& upstream) {
  if (!has_cache_) throw ConfigError("strf backward: no cached forward pass");
  const int T = cached_E_.rows;
  const int B = cached_E_.cols;
  const int ht = cfg_.strf_half_t;
  const int hf = cfg_.strf_half_f;
  const int n = cfg_.strf_n_filters;
  if (upstream.channels != n || upstream.rows != T || upstream.cols != B) {
    throw ConfigError("strf backward: upstream gradient shape mismatch");
  }

  const int kt = 2 * ht + 1;
  const int kf = 2 * hf + 1;
  std::vector<double> corr(static_cast<size_t>(kt) * kf);
  for (int k = 0; k < n; ++k) {
    // corr(dt,df) = sum_{t,f} upstream(k,t,f) * E(t-dt, f-df), the projection
    // of the upstream gradient onto each kernel tap position.
    std::fill(corr.begin(), corr.end(), 0.0);
    for (int dt = -ht; dt <= ht; ++dt) {
      const int t0 = std::max(0, dt);
      const int t1 = std::min(T - 1, T - 1 + dt);
      for (int df = -hf; df <= hf; ++df) {
        const int f0 = std::max(0, df);
        const int f1 = std::min(B - 1, B - 1 + df);
        double acc = 0.0;
        for (int t = t0; t <= t1; ++t) {
          const double* e = &cached_E_.v[static_cast<size_t>(t - dt) * B + (f0 - df)];
          const double* u = &upstream.v[(static_cast<size_t>(k) * T + t) * B + f0];
          for (int f = 0; f <= f1 - f0; ++f) acc += u[f] * e[f];
        }
        corr[static_cast<size_t>(dt + ht) * kf + (df + hf)] = acc;
      }
    }

    const Strf2dFilterParams p = filter_params(k);
    const double cg = std::cos(p.gamma);
    const double sg = std::sin(p.gamma);
    const double norm = 1.0 / (2.0 * M_PI * p.sigma_t * p.sigma_f);
    double dF = 0.0, dgamma = 0.0, dst = 0.0, dsf = 0.0;
    for (int dt = -ht; dt <= ht; ++dt) {
      for (int df = -hf; df <= hf; ++df) {
        const double c = corr[static_cast<size_t>(dt + ht) * kf + (df + hf)];
        const double w =
            norm * std::exp(-dt * dt / (2.0 * p.sigma_t * p.sigma_t) -
                            df * df / (2.0 * p.sigma_f * p.sigma_f));
        const double rot = dt * cg + df * sg;
        const double phase = 2.0 * M_PI * p.F * rot;
        const double gval = w * std::cos(phase);
        const double wsin = w * std::sin(phase);
        dF += c * (-wsin * 2.0 * M_PI * rot);
        dgamma += c * (-wsin * 2.0 * M_PI * p.F * (-dt * sg + df * cg));
        dst += c * gval *
               (dt * dt / (p.sigma_t * p.sigma_t * p.sigma_t) - 1.0 / p.sigma_t);
        dsf += c * gval *
               (df * df / (p.sigma_f * p.sigma_f * p.sigma_f) - 1.0 / p.sigma_f);
      }
    }
    F_.grad[k] += dF;
    gamma_.grad[k] += dgamma;
    log_sigma_t_.grad[k] += dst * p.sigma_t;
    log_sigma_f_.grad[k] += dsf * p.sigma_f;
  }
}

// -------------------------------------------------------------------------
// TD

TdFrontend::TdFrontend(const FrontendConfig& cfg, uint64_t)
    : cfg_(cfg) {
  validate_frontend_config(cfg);
  kernel_len_ = cfg.kernel_len();
  stride_ = cfg.hop();
  const int half = (kernel_len_ - 1) / 2;
  taps_ = ParamTensor("td.filters", {cfg.n_filters, kernel_len_});
  const std::vector<Gabor1dParams> bank = init_mel_gabor_bank(
      cfg.n_filters, cfg.f_min_hz, cfg.f_max_hz, cfg.sample_rate_hz, half);
  for (int nf = 0; nf < cfg.n_filters; ++nf) {
    const std::vector<cplx> phi = gabor_wavelet_1d(bank[nf], half);
    for (int j = 0; j < kernel_len_; ++j) {
      taps_.value[static_cast<size_t>(nf) * kernel_len_ + j] = phi[j].real();
    }
  }
  pool_.resize(kernel_len_);
  for (int i = 0; i < kernel_len_; ++i) {
    const double h = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (kernel_len_ - 1));
    pool_[i] = h * h;
  }
}

std::vector<ParamTensor*> TdFrontend::params() { return {&taps_}; }

FeatureMap TdFrontend::forward(const Waveform& w) {
  if (w.sample_rate_hz != cfg_.sample_rate_hz) {
    throw ConfigError("td: waveform rate " + std::to_string(w.sample_rate_hz) +
                      " != configured rate " +
                      std::to_string(cfg_.sample_rate_hz));
  }
  const int Lx = static_cast<int>(w.samples.size());
  const int K = kernel_len_;
  if (Lx < 2 * K - 1) {
    throw DataError("td: input too short (" + std::to_string(Lx) +
                    " samples, need " + std::to_string(2 * K - 1) + ")");
  }
  const int L1 = Lx - K + 1;
  const int L2 = L1 - K + 1;
  const int frames = (L2 - 1) / stride_ + 1;
  const int n = cfg_.n_filters;

  const size_t n1 = next_power_of_two(static_cast<size_t>(Lx + K - 1));
  const std::vector<cplx> X = padded_fft_real(w.samples, n1);

  FeatureMap fm;
  fm.values = Grid3(1, frames, n);
  fm.hop_s = static_cast<double>(stride_) / cfg_.sample_rate_hz;
  cached_y_.assign(n, {});
  std::vector<cplx> kernel(K);
  for (int nf = 0; nf < n; ++nf) {
    for (int j = 0; j < K; ++j) {
      kernel[j] = cplx(taps_.value[static_cast<size_t>(nf) * K + j], 0.0);
    }
    const std::vector<cplx> y = valid_conv(X, n1, kernel, Lx);
    std::vector<double>& yr = cached_y_[nf];
    yr.resize(L1);
    for (int i = 0; i < L1; ++i) yr[i] = y[i].real();
    for (int m = 0; m < frames; ++m) {
      const double* u = &yr[static_cast<size_t>(m) * stride_];
      double acc = 0.0;
      for (int i = 0; i < K; ++i) acc += u[i] * u[i] * pool_[i];
      fm.values.at(0, m, nf) = acc;
    }
  }
  cached_x_ = w.samples;
  has_cache_ = true;
  return fm;
}

void TdFrontend::backward(const Grid3& upstream) {
  if (!has_cache_) throw ConfigError("td backward: no cached forward pass");
  const int Lx = static_cast<int>(cached_x_.size());
  const int K = kernel_len_;
  const int L1 = Lx - K + 1;
  const int frames = (L1 - K) / stride_ + 1;
  const int n = cfg_.n_filters;
  const Grid2 up = upstream_channel0(upstream, frames, n, "td backward");

  const size_t n2 = next_power_of_two(static_cast<size_t>(Lx + L1 - 1));
  const std::vector<cplx> X = padded_fft_real(cached_x_, n2);

  std::vector<double> dy(L1);
  std::vector<cplx> g(L1);
  for (int nf = 0; nf < n; ++nf) {
    std::fill(dy.begin(), dy.end(), 0.0);
    for (int m = 0; m < frames; ++m) {
      const double upv = up.at(m, nf);
      if (upv == 0.0) continue;
      double* d = &dy[static_cast<size_t>(m) * stride_];
      for (int i = 0; i < K; ++i) d[i] += upv * pool_[i];
    }
    const std::vector<double>& y = cached_y_[nf];
    for (int i = 0; i < L1; ++i) g[i] = cplx(dy[i] * 2.0 * y[i], 0.0);
    const std::vector<cplx> cc = corr_against_input(X, n2, g, K);
    for (int j = 0; j < K; ++j) {
      taps_.grad[static_cast<size_t>(nf) * K + j] += cc[K - 1 - j].real();
    }
  }
}

// -------------------------------------------------------------------------
// PCEN

PcenFrontend::PcenFrontend(const FrontendConfig& cfg, uint64_t)
    : cfg_(cfg), stage_(cfg) {
  validate_frontend_config(cfg);
  const int n = cfg.n_mels;
  log_alpha_ = ParamTensor("pcen.log_alpha", {n});
  log_delta_ = ParamTensor("pcen.log_delta", {n});
  logit_r_ = ParamTensor("pcen.logit_r", {n});
  std::fill(log_alpha_.value.begin(), log_alpha_.value.end(),
            std::log(cfg.pcen_alpha));
  std::fill(log_delta_.value.begin(), log_delta_.value.end(),
            std::log(cfg.pcen_delta));
  std::fill(logit_r_.value.begin(), logit_r_.value.end(), logit(cfg.pcen_r));
  if (cfg.pcen_learn_s) {
    logit_s_ = ParamTensor("pcen.logit_s", {n});
    std::fill(logit_s_.value.begin(), logit_s_.value.end(), logit(cfg.pcen_s));
  }
}

std::vector<ParamTensor*> PcenFrontend::params() {
  std::vector<ParamTensor*> out = {&log_alpha_, &log_delta_, &logit_r_};
  if (cfg_.pcen_learn_s) out.push_back(&logit_s_);
  return out;
}

PcenParams PcenFrontend::constrained() const {
  const int n = cfg_.n_mels;
  PcenParams p;
  p.alpha.resize(n);
  p.delta.resize(n);
  p.r.resize(n);
  p.eps = cfg_.pcen_eps;
  for (int c = 0; c < n; ++c) {
    p.alpha[c] = std::exp(log_alpha_.value[c]);
    p.delta[c] = std::exp(log_delta_.value[c]);
    p.r[c] = sigmoid(logit_r_.value[c]);
  }
  if (cfg_.pcen_learn_s) {
    p.s.resize(n);
    for (int c = 0; c < n; ++c) p.s[c] = sigmoid(logit_s_.value[c]);
  } else {
    p.s.assign(1, cfg_.pcen_s);
  }
  return p;
}

FeatureMap PcenFrontend::forward(const Waveform& w) {
  const MelSpectrogram E = stage_.mel(w);
  const PcenParams p = constrained();
  const Grid2 out = pcen_forward(E.values, p, &cached_M_);
  cached_E_ = E.values;
  has_cache_ = true;
  FeatureMap fm;
  fm.values = Grid3(1, out.rows, out.cols);
  fm.values.v = out.v;
  fm.hop_s = E.hop_s;
  return fm;
}

void PcenFrontend::backward(const Grid3& upstream) {
  if (!has_cache_) throw ConfigError("pcen backward: no cached forward pass");
  const Grid2 up = upstream_channel0(upstream, cached_E_.rows, cached_E_.cols,
                                     "pcen backward");
  const PcenParams p = constrained();
  const PcenGrads g = pcen_backward(cached_E_, cached_M_, p, up);
  for (int c = 0; c < cfg_.n_mels; ++c) {
    log_alpha_.grad[c] += g.d_alpha[c] * p.alpha[c];
    log_delta_.grad[c] += g.d_delta[c] * p.delta[c];
    logit_r_.grad[c] += g.d_r[c] * p.r[c] * (1.0 - p.r[c]);
    if (cfg_.pcen_learn_s) {
      logit_s_.grad[c] += g.d_s[c] * p.s[c] * (1.0 - p.s[c]);
    }
  }
}

// -------------------------------------------------------------------------
// LEAF

LeafFrontend::LeafFrontend(const FrontendConfig& cfg, uint64_t)
    : cfg_(cfg) {
  validate_frontend_config(cfg);
  kernel_len_ = cfg.kernel_len();
  stride_ = cfg.hop();
  const int half = (kernel_len_ - 1) / 2;
  const int n = cfg.n_filters;
  eta_raw_ = ParamTensor("leaf.eta_raw", {n});
  log_sigma_bw_ = ParamTensor("leaf.log_sigma_bw", {n});
  log_sigma_lp_ = ParamTensor("leaf.log_sigma_lp", {n});
  const std::vector<Gabor1dParams> bank = init_mel_gabor_bank(
      n, cfg.f_min_hz, cfg.f_max_hz, cfg.sample_rate_hz, half);
  for (int nf = 0; nf < n; ++nf) {
    eta_raw_.value[nf] = logit(2.0 * bank[nf].eta);
    log_sigma_bw_.value[nf] = std::log(bank[nf].sigma_bw);
    log_sigma_lp_.value[nf] = std::log(static_cast<double>(stride_));
  }
  log_alpha_ = ParamTensor("leaf.pcen.log_alpha", {n});
  log_delta_ = ParamTensor("leaf.pcen.log_delta", {n});
  logit_r_ = ParamTensor("leaf.pcen.logit_r", {n});
  std::fill(log_alpha_.value.begin(), log_alpha_.value.end(),
            std::log(cfg.pcen_alpha));
  std::fill(log_delta_.value.begin(), log_delta_.value.end(),
            std::log(cfg.pcen_delta));
  std::fill(logit_r_.value.begin(), logit_r_.value.end(), logit(cfg.pcen_r));
  if (cfg.pcen_learn_s) {
    logit_s_ = ParamTensor("leaf.pcen.logit_s", {n});
    std::fill(logit_s_.value.begin(), logit_s_.value.end(), logit(cfg.pcen_s));
  }
}

std::vector<ParamTensor*> LeafFrontend::params() {
  std::vector<ParamTensor*> out = {&eta_raw_, &log_sigma_bw_, &log_sigma_lp_,
                                   &log_alpha_, &log_delta_, &logit_r_};
  if (cfg_.pcen_learn_s) out.push_back(&logit_s_);
  return out;
}

PcenParams LeafFrontend::pcen_constrained() const {
  const int n = cfg_.n_filters;
  PcenParams p;
  p.alpha.resize(n);
  p.delta.resize(n);
  p.r.resize(n);
  p.eps = cfg_.pcen_eps;
  for (int c = 0; c < n; ++c) {
    p.alpha[c] = std::exp(log_alpha_.value[c]);
    p.delta[c] = std::exp(log_delta_.value[c]);
    p.r[c] = sigmoid(logit_r_.value[c]);
  }
  if (cfg_.pcen_learn_s) {
    p.s.resize(n);
    for (int c = 0; c < n; ++c) p.s[c] = sigmoid(logit_s_.value[c]);
  } else {
    p.s.assign(1, cfg_.pcen_s);
  }
  return p;
}

Grid2 LeafFrontend::compute_bands(const std::vector<double>& x,
                                  bool keep_cache) {
  const int Lx = static_cast<int>(x.size());
  const int K = kernel_len_;
  if (Lx < 2 * K - 1) {
    throw DataError("leaf: input too short (" + std::to_string(Lx) +
                    " samples, need " + std::to_string(2 * K - 1) + ")");
  }
  const int L1 = Lx - K + 1;
  const int L2 = L1 - K + 1;
  const int frames = (L2 - 1) / stride_ + 1;
  const int n = cfg_.n_filters;
  const int half = (K - 1) / 2;

  const size_t n1 = next_power_of_two(static_cast<size_t>(Lx + K - 1));
  const std::vector<cplx> X = padded_fft_real(x, n1);

  Grid2 bands(frames, n);
  if (keep_cache) {
    cached_yr_.assign(n, {});
    cached_yi_.assign(n, {});
  }
  for (int nf = 0; nf < n; ++nf) {
    Gabor1dParams gp;
    gp.eta = eta(nf);
    gp.sigma_bw = sigma_bw(nf);
    const std::vector<cplx> phi = gabor_wavelet_1d(gp, half);
    const std::vector<cplx> y = valid_conv(X, n1, phi, Lx);
    GaussianLowpassParams lp;
    lp.sigma_lp = sigma_lp(nf);
    const std::vector<double> W = gaussian_lowpass_1d(lp, half);
    std::vector<double> u(L1);
    for (int i = 0; i < L1; ++i) u[i] = std::norm(y[i]);
    for (int m = 0; m < frames; ++m) {
      const double* uu = &u[static_cast<size_t>(m) * stride_];
      double acc = 0.0;
      for (int i = 0; i < K; ++i) acc += uu[i] * W[i];
      bands.at(m, nf) = acc;
    }
    if (keep_cache) {
      cached_yr_[nf].resize(L1);
      cached_yi_[nf].resize(L1);
      for (int i = 0; i < L1; ++i) {
        cached_yr_[nf][i] = y[i].real();
        cached_yi_[nf][i] = y[i].imag();
      }
    }
  }
  return bands;
}

Grid2 LeafFrontend::band_energies(const Waveform& w) {
  if (w.sample_rate_hz != cfg_.sample_rate_hz) {
    throw ConfigError("leaf: waveform rate mismatch");
  }
  return compute_bands(w.samples, false);
}

FeatureMap LeafFrontend::forward(const Waveform& w) {
  if (w.sample_rate_hz != cfg_.sample_rate_hz) {
    throw ConfigError("leaf: waveform rate " +
                      std::to_string(w.sample_rate_hz) +
                      " != configured rate " +
                      std::to_string(cfg_.sample_rate_hz));
  }
  const Grid2 bands = compute_bands(w.samples, true);
  const PcenParams p = pcen_constrained();
  const Grid2 out = pcen_forward(bands, p, &cached_M_);
  cached_E_ = bands;
  cached_x_ = w.samples;
  has_cache_ = true;
  FeatureMap fm;
  fm.values = Grid3(1, out.rows, out.cols);
  fm.values.v = out.v;
  fm.hop_s = static_cast<double>(stride_) / cfg_.sample_rate_hz;
  return fm;
}

void LeafFrontend::backward(const Grid3& upstream) {
  if (!has_cache_) throw ConfigError("leaf backward: no cached forward pass");
  const int Lx = static_cast<int>(cached_x_.size());
  const int K = kernel_len_;
  const int L1 = Lx - K + 1;
  const int frames = cached_E_.rows;
  const int n = cfg_.n_filters;
  const int half = (K - 1) / 2;
  const Grid2 up = upstream_channel0(upstream, frames, n, "leaf backward");

  const PcenParams p = pcen_constrained();
  const PcenGrads pg = pcen_backward(cached_E_, cached_M_, p, up);
  for (int c = 0; c < n; ++c) {
    log_alpha_.grad[c] += pg.d_alpha[c] * p.alpha[c];
    log_delta_.grad[c] += pg.d_delta[c] * p.delta[c];
    logit_r_.grad[c] += pg.d_r[c] * p.r[c] * (1.0 - p.r[c]);
    if (cfg_.pcen_learn_s) {
      logit_s_.grad[c] += pg.d_s[c] * p.s[c] * (1.0 - p.s[c]);
    }
  }

  const size_t n2 = next_power_of_two(static_cast<size_t>(Lx + L1 - 1));
  const std::vector<cplx> X = padded_fft_real(cached_x_, n2);

  std::vector<double> u(L1), du(L1), accW(K);
  std::vector<cplx> g(L1);
  for (int nf = 0; nf < n; ++nf) {
    const std::vector<double>& yr = cached_yr_[nf];
    const std::vector<double>& yi = cached_yi_[nf];
    for (int i = 0; i < L1; ++i) u[i] = yr[i] * yr[i] + yi[i] * yi[i];

    GaussianLowpassParams lp;
    lp.sigma_lp = sigma_lp(nf);
    const std::vector<double> W = gaussian_lowpass_1d(lp, half);
    std::fill(du.begin(), du.end(), 0.0);
    std::fill(accW.begin(), accW.end(), 0.0);
    for (int m = 0; m < frames; ++m) {
      const double dE = pg.d_E.at(m, nf);
      if (dE == 0.0) continue;
      double* d = &du[static_cast<size_t>(m) * stride_];
      const double* uu = &u[static_cast<size_t>(m) * stride_];
      for (int i = 0; i < K; ++i) {
        d[i] += dE * W[i];
        accW[i] += dE * uu[i];
      }
    }
    const double slp = lp.sigma_lp;
    double d_slp = 0.0;
    for (int i = 0; i < K; ++i) {
      const double t = i - half;
      d_slp += accW[i] * W[i] * (t * t / (slp * slp * slp) - 1.0 / slp);
    }
    log_sigma_lp_.grad[nf] += d_slp * slp;

    // dL/dphi via correlation with the input, then the chain rule into the
    // Gabor parameters.
    for (int i = 0; i < L1; ++i) {
      g[i] = cplx(du[i] * 2.0 * yr[i], du[i] * 2.0 * yi[i]);
    }
    const std::vector<cplx> cc = corr_against_input(X, n2, g, K);
    const double et = eta(nf);
    const double sbw = sigma_bw(nf);
    const double norm = 1.0 / (std::sqrt(2.0 * M_PI) * sbw);
    double d_eta = 0.0, d_sbw = 0.0;
    for (int j = 0; j < K; ++j) {
      // cc[l] = sum conj(g)*x: real part pairs with dphi_r, -imag with dphi_i.
      const double dphi_r = cc[K - 1 - j].real();
      const double dphi_i = -cc[K - 1 - j].imag();
      const double t = j - half;
      const double env = norm * std::exp(-t * t / (2.0 * sbw * sbw));
      const double cph = std::cos(2.0 * M_PI * et * t);
      const double sph = std::sin(2.0 * M_PI * et * t);
      d_eta += dphi_r * (-env * sph * 2.0 * M_PI * t) +
               dphi_i * (env * cph * 2.0 * M_PI * t);
      d_sbw += (dphi_r * cph + dphi_i * sph) * env *
               (t * t / (sbw * sbw * sbw) - 1.0 / sbw);
    }
    const double sig = sigmoid(eta_raw_.value[nf]);
    eta_raw_.grad[nf] += d_eta * 0.5 * sig * (1.0 - sig);
    log_sigma_bw_.grad[nf] += d_sbw * sbw;
  }
}

// -------------------------------------------------------------------------

std::unique_ptr<Frontend> make_frontend(FrontendKind kind,
                                        const FrontendConfig& cfg,
                                        uint64_t seed) {
  validate_frontend_config(cfg);
  switch (kind) {
    case FrontendKind::Spect: return std::make_unique<SpectFrontend>(cfg);
    case FrontendKind::Mel: return std::make_unique<MelFrontend>(cfg);
    case FrontendKind::Logmel: return std::make_unique<LogmelFrontend>(cfg);
    case FrontendKind::Strf: return std::make_unique<StrfFrontend>(cfg, seed);
    case FrontendKind::Td: return std::make_unique<TdFrontend>(cfg, seed);
    case FrontendKind::Pcen: return std::make_unique<PcenFrontend>(cfg, seed);
    case FrontendKind::Leaf: return std::make_unique<LeafFrontend>(cfg, seed);
  }
  throw ConfigError("unknown frontend kind");
}

FeatureMap frontend_forward(FrontendKind kind, const Waveform& w,
                            const FrontendConfig& cfg, uint64_t seed) {
  return make_frontend(kind, cfg, seed)->forward(w);
}

}  // namespace avifront
