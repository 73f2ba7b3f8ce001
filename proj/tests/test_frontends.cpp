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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <memory>
#include <vector>

#include "avifront/frontend.h"
#include "avifront/rng.h"
#include "doctest.h"

using namespace avifront;

namespace {

constexpr double kPi = 3.14159265358979323846;

Waveform noise_clip(int sample_rate_hz, double seconds, uint64_t seed) {
  Waveform w;
  w.sample_rate_hz = sample_rate_hz;
  w.samples.resize(static_cast<size_t>(seconds * sample_rate_hz));
  Rng rng(seed);
  for (double& s : w.samples) s = 0.1 * rng.normal();
  return w;
}

Waveform tone_clip(int sample_rate_hz, double seconds, double freq_hz) {
  Waveform w;
  w.sample_rate_hz = sample_rate_hz;
  const size_t n = static_cast<size_t>(seconds * sample_rate_hz);
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    w.samples[i] = 0.5 * std::sin(2.0 * kPi * freq_hz * i / sample_rate_hz);
  }
  return w;
}

MelSpectrogram random_mel(int frames, int bands, uint64_t seed) {
  MelSpectrogram E;
  E.values = Grid2(frames, bands);
  E.hop_s = 0.0025;
  Rng rng(seed);
  for (double& x : E.values.v) {
    const double g = rng.normal();
    x = 0.1 + g * g;
  }
  return E;
}

bool all_finite(const FeatureMap& fm) {
  for (const double v : fm.values.v) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("all frontends produce the documented shapes and hop") {
  FrontendConfig cfg;
  const Waveform w = noise_clip(44100, 0.25, 5);
  const int win = cfg.win_len();
  const int hop = cfg.hop();
  REQUIRE(win == 441);
  REQUIRE(hop == 110);
  const int n = static_cast<int>(w.samples.size());
  const int stft_frames = (n - win) / hop + 1;
  const int K = cfg.kernel_len();
  CHECK(K % 2 == 1);
  const int conv_frames = (n - 2 * K + 2 - 1) / hop + 1;
  const double hop_s = static_cast<double>(hop) / 44100.0;

  struct Expect {
    FrontendKind kind;
    int channels;
    int frames;
    int bands;
  };
  const std::vector<Expect> table = {
      {FrontendKind::Spect, 1, stft_frames, 257},
      {FrontendKind::Mel, 1, stft_frames, cfg.n_mels},
      {FrontendKind::Logmel, 1, stft_frames, cfg.n_mels},
      {FrontendKind::Strf, cfg.strf_n_filters, stft_frames, cfg.n_mels},
      {FrontendKind::Td, 1, conv_frames, cfg.n_filters},
      {FrontendKind::Pcen, 1, stft_frames, cfg.n_mels},
      {FrontendKind::Leaf, 1, conv_frames, cfg.n_filters},
  };
  for (const Expect& e : table) {
    CAPTURE(to_string(e.kind));
    const FeatureMap fm = frontend_forward(e.kind, w, cfg, 17);
    CHECK(fm.channels() == e.channels);
    CHECK(fm.n_frames() == e.frames);
    CHECK(fm.n_bands() == e.bands);
    CHECK(fm.hop_s == doctest::Approx(hop_s).epsilon(1e-15));
    CHECK(all_finite(fm));
  }
}

TEST_CASE("logmel is the elementwise floored log of mel") {
  FrontendConfig cfg;
  const Waveform w = noise_clip(44100, 0.12, 9);
  const FeatureMap mel = frontend_forward(FrontendKind::Mel, w, cfg, 0);
  const FeatureMap logmel = frontend_forward(FrontendKind::Logmel, w, cfg, 0);
  REQUIRE(mel.values.same_shape(logmel.values));
  for (size_t i = 0; i < mel.values.v.size(); ++i) {
    CHECK(logmel.values.v[i] ==
          doctest::Approx(std::log(mel.values.v[i] + cfg.log_floor_eps))
              .epsilon(1e-12));
  }
}

TEST_CASE("pcen frontend with alpha = 0 and r = 1 reproduces mel") {
  FrontendConfig cfg;
  cfg.pcen_alpha = 0.0;
  cfg.pcen_r = 1.0;
  const Waveform w = noise_clip(44100, 0.12, 13);
  const FeatureMap mel = frontend_forward(FrontendKind::Mel, w, cfg, 0);
  const FeatureMap pcen = frontend_forward(FrontendKind::Pcen, w, cfg, 0);
  REQUIRE(mel.values.same_shape(pcen.values));
  for (size_t i = 0; i < mel.values.v.size(); ++i) {
    CHECK(std::fabs(pcen.values.v[i] - mel.values.v[i]) <= 1e-12);
  }
}

TEST_CASE("strf convolution matches a four-loop reference on an 8x8 grid") {
  FrontendConfig cfg;
  cfg.strf_n_filters = 6;
  cfg.strf_half_t = 5;
  cfg.strf_half_f = 5;
  StrfFrontend fe(cfg, 21);
  const MelSpectrogram E = random_mel(8, 8, 33);
  const FeatureMap out = fe.forward_mel(E);
  REQUIRE(out.channels() == 6);
  REQUIRE(out.n_frames() == 8);
  REQUIRE(out.n_bands() == 8);

  for (int k = 0; k < 6; ++k) {
    const CGrid2 kernel =
        gabor_kernel_2d(fe.filter_params(k), cfg.strf_half_t, cfg.strf_half_f);
    for (int t = 0; t < 8; ++t) {
      for (int f = 0; f < 8; ++f) {
        double acc = 0.0;
        for (int dt = -cfg.strf_half_t; dt <= cfg.strf_half_t; ++dt) {
          for (int df = -cfg.strf_half_f; df <= cfg.strf_half_f; ++df) {
            const int tt = t - dt;
            const int ff = f - df;
            if (tt < 0 || tt >= 8 || ff < 0 || ff >= 8) continue;
            acc += kernel.at(dt + cfg.strf_half_t, df + cfg.strf_half_f).real() *
                   E.values.at(tt, ff);
          }
        }
        CHECK(std::fabs(out.values.at(k, t, f) - acc) <= 1e-10);
      }
    }
  }
}

TEST_CASE("strf output is linear in the mel input") {
  FrontendConfig cfg;
  cfg.strf_n_filters = 4;
  StrfFrontend fe(cfg, 42);
  const MelSpectrogram E1 = random_mel(10, 12, 1);
  const MelSpectrogram E2 = random_mel(10, 12, 2);
  MelSpectrogram mix = E1;
  for (size_t i = 0; i < mix.values.v.size(); ++i) {
    mix.values.v[i] = 2.5 * E1.values.v[i] - 0.75 * E2.values.v[i];
  }
  const FeatureMap y1 = fe.forward_mel(E1);
  const FeatureMap y2 = fe.forward_mel(E2);
  const FeatureMap ym = fe.forward_mel(mix);
  for (size_t i = 0; i < ym.values.v.size(); ++i) {
    CHECK(std::fabs(ym.values.v[i] -
                    (2.5 * y1.values.v[i] - 0.75 * y2.values.v[i])) <= 1e-10);
  }
}

TEST_CASE("td channels are selective for their initialization frequency") {
  FrontendConfig cfg;
  TdFrontend fe(cfg, 0);
  const int half = (fe.kernel_len() - 1) / 2;
  const auto bank =
      init_mel_gabor_bank(cfg.n_filters, cfg.f_min_hz, cfg.f_max_hz, 44100, half);
  for (const int j : {0, 13, 26, 39}) {
    const double fc = bank[j].eta * 44100.0;
    const FeatureMap fm = fe.forward(tone_clip(44100, 0.12, fc));
    std::vector<double> mean(cfg.n_filters, 0.0);
    for (int m = 0; m < fm.n_frames(); ++m) {
      for (int b = 0; b < fm.n_bands(); ++b) mean[b] += fm.values.at(0, m, b);
    }
    int argmax = 0;
    for (int b = 1; b < cfg.n_filters; ++b) {
      if (mean[b] > mean[argmax]) argmax = b;
    }
    CAPTURE(j);
    CHECK(argmax == j);
  }
}

TEST_CASE("leaf band energies are selective for their center frequency") {
  FrontendConfig cfg;
  LeafFrontend fe(cfg, 0);
  const int half = (fe.kernel_len() - 1) / 2;
  const auto bank =
      init_mel_gabor_bank(cfg.n_filters, cfg.f_min_hz, cfg.f_max_hz, 44100, half);
  for (const int j : {0, 20, 39}) {
    const double fc = bank[j].eta * 44100.0;
    const Grid2 bands = fe.band_energies(tone_clip(44100, 0.12, fc));
    std::vector<double> mean(cfg.n_filters, 0.0);
    for (int m = 0; m < bands.rows; ++m) {
      for (int b = 0; b < bands.cols; ++b) mean[b] += bands.at(m, b);
    }
    int argmax = 0;
    for (int b = 1; b < cfg.n_filters; ++b) {
      if (mean[b] > mean[argmax]) argmax = b;
    }
    CAPTURE(j);
    CHECK(argmax == j);
  }
}

TEST_CASE("leaf initialization matches the mel gabor bank") {
  FrontendConfig cfg;
  LeafFrontend fe(cfg, 0);
  const int half = (fe.kernel_len() - 1) / 2;
  const auto bank =
      init_mel_gabor_bank(cfg.n_filters, cfg.f_min_hz, cfg.f_max_hz, 44100, half);
  for (int nf = 0; nf < cfg.n_filters; ++nf) {
    CHECK(fe.eta(nf) == doctest::Approx(bank[nf].eta).epsilon(1e-12));
    CHECK(fe.sigma_bw(nf) ==
          doctest::Approx(bank[nf].sigma_bw).epsilon(1e-12));
    CHECK(fe.sigma_lp(nf) ==
          doctest::Approx(static_cast<double>(fe.stride())).epsilon(1e-12));
  }
}

TEST_CASE("frontends are deterministic given a seed") {
  FrontendConfig cfg;
  cfg.strf_n_filters = 8;
  const Waveform w = noise_clip(44100, 0.12, 3);
  for (const FrontendKind kind :
       {FrontendKind::Spect, FrontendKind::Logmel, FrontendKind::Strf,
        FrontendKind::Td, FrontendKind::Pcen, FrontendKind::Leaf}) {
    CAPTURE(to_string(kind));
    const FeatureMap a = frontend_forward(kind, w, cfg, 77);
    const FeatureMap b = frontend_forward(kind, w, cfg, 77);
    REQUIRE(a.values.v.size() == b.values.v.size());
    for (size_t i = 0; i < a.values.v.size(); ++i) {
      CHECK(a.values.v[i] == b.values.v[i]);
    }
  }
  // Different seeds give a different random 2-D Gabor bank.
  const FeatureMap s1 = frontend_forward(FrontendKind::Strf, w, cfg, 1);
  const FeatureMap s2 = frontend_forward(FrontendKind::Strf, w, cfg, 2);
  bool any_diff = false;
  for (size_t i = 0; i < s1.values.v.size(); ++i) {
    if (s1.values.v[i] != s2.values.v[i]) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("kind round trip and learnability flags") {
  for (const char* name :
       {"spect", "mel", "logmel", "strf", "td", "pcen", "leaf"}) {
    CHECK(to_string(frontend_kind_from_string(name)) == name);
  }
  CHECK_THROWS_AS(frontend_kind_from_string("mfcc"), ConfigError);
  CHECK_FALSE(frontend_is_learnable(FrontendKind::Spect));
  CHECK_FALSE(frontend_is_learnable(FrontendKind::Mel));
  CHECK_FALSE(frontend_is_learnable(FrontendKind::Logmel));
  CHECK(frontend_is_learnable(FrontendKind::Strf));
  CHECK(frontend_is_learnable(FrontendKind::Td));
  CHECK(frontend_is_learnable(FrontendKind::Pcen));
  CHECK(frontend_is_learnable(FrontendKind::Leaf));
}

TEST_CASE("rate mismatch and short input are rejected") {
  FrontendConfig cfg;
  Waveform w = noise_clip(22050, 0.12, 4);
  CHECK_THROWS_AS(frontend_forward(FrontendKind::Td, w, cfg, 0), ConfigError);
  CHECK_THROWS_AS(frontend_forward(FrontendKind::Leaf, w, cfg, 0), ConfigError);
  Waveform tiny = noise_clip(44100, 0.01, 4);
  CHECK_THROWS_AS(frontend_forward(FrontendKind::Td, tiny, cfg, 0), DataError);
  Waveform empty;
  empty.sample_rate_hz = 44100;
  CHECK_THROWS_AS(frontend_forward(FrontendKind::Spect, empty, cfg, 0),
                  DataError);
}

TEST_CASE("backward on a fixed frontend is rejected") {
  FrontendConfig cfg;
  auto fe = make_frontend(FrontendKind::Logmel, cfg, 0);
  Grid3 up(1, 2, cfg.n_mels, 1.0);
  CHECK_THROWS_AS(fe->backward(up), ConfigError);
}
