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

#include "avifront/pcen.h"

#include <cmath>
#include <string>

namespace avifront {
namespace {

void validate_s(const std::vector<double>& s, int n_channels) {
  if (s.size() != 1 && s.size() != static_cast<size_t>(n_channels)) {
    throw ConfigError("pcen: s must be scalar or one value per channel (" +
                      std::to_string(n_channels) + "), got " +
                      std::to_string(s.size()));
  }
  for (double v : s) {
    if (!(v > 0.0) || v > 1.0) {
      throw ConfigError("pcen: s must be in (0, 1], got " + std::to_string(v));
    }
  }
}

double s_for_channel(const std::vector<double>& s, int c) {
  return s.size() == 1 ? s[0] : s[c];
}

}  // namespace

PcenParams PcenParams::defaults(int n_channels, double alpha, double delta,
                                double r, double s, double eps) {
  PcenParams p;
  p.alpha.assign(n_channels, alpha);
  p.delta.assign(n_channels, delta);
  p.r.assign(n_channels, r);
  p.s.assign(1, s);
  p.eps = eps;
  return p;
}

void validate_pcen_params(const PcenParams& p, int n_channels) {
  const size_t n = static_cast<size_t>(n_channels);
  if (p.alpha.size() != n || p.delta.size() != n || p.r.size() != n) {
    throw ConfigError("pcen: alpha/delta/r must have one value per channel");
  }
  for (int c = 0; c < n_channels; ++c) {
    if (p.alpha[c] < 0.0) throw ConfigError("pcen: alpha must be >= 0");
    if (!(p.delta[c] > 0.0)) throw ConfigError("pcen: delta must be > 0");
    if (!(p.r[c] > 0.0) || p.r[c] > 1.0) {
      throw ConfigError("pcen: r must be in (0, 1]");
    }
  }
  validate_s(p.s, n_channels);
  if (!(p.eps > 0.0)) throw ConfigError("pcen: eps must be > 0");
}

Grid2 pcen_smoother(const Grid2& E, const std::vector<double>& s) {
  validate_s(s, E.cols);
  Grid2 M(E.rows, E.cols);
  if (E.rows == 0) return M;
  for (int c = 0; c < E.cols; ++c) M.at(0, c) = E.at(0, c);
  for (int t = 1; t < E.rows; ++t) {
    for (int c = 0; c < E.cols; ++c) {
      const double sc = s_for_channel(s, c);
      M.at(t, c) = (1.0 - sc) * M.at(t - 1, c) + sc * E.at(t, c);
    }
  }
  return M;
}

Grid2 pcen_forward(const Grid2& E, const PcenParams& p, Grid2* cache_M) {
  validate_pcen_params(p, E.cols);
  Grid2 M = pcen_smoother(E, p.s);
  Grid2 out(E.rows, E.cols);
  for (int t = 0; t < E.rows; ++t) {
    for (int c = 0; c < E.cols; ++c) {
      const double gain =
          E.at(t, c) / std::pow(M.at(t, c) + p.eps, p.alpha[c]);
      out.at(t, c) =
          std::pow(gain + p.delta[c], p.r[c]) - std::pow(p.delta[c], p.r[c]);
    }
  }
  if (cache_M != nullptr) *cache_M = std::move(M);
  return out;
}

PcenGrads pcen_backward(const Grid2& E, const Grid2& M, const PcenParams& p,
                        const Grid2& upstream) {
  validate_pcen_params(p, E.cols);
  if (!E.same_shape(M) || !E.same_shape(upstream)) {
    throw ConfigError("pcen_backward: shape mismatch");
  }
  const int T = E.rows;
  const int C = E.cols;
  PcenGrads g;
  g.d_alpha.assign(C, 0.0);
  g.d_delta.assign(C, 0.0);
  g.d_r.assign(C, 0.0);
  g.d_s.assign(p.s.size(), 0.0);
  g.d_E = Grid2(T, C);
  if (T == 0) return g;

  // Direct per-cell terms, then the smoother recurrence backwards in time:
  // lambda(t) = dL/dM(t) = direct(t) + (1 - s) * lambda(t+1).
  Grid2 direct_M(T, C);
  Grid2 dE_direct(T, C);
  for (int t = 0; t < T; ++t) {
    for (int c = 0; c < C; ++c) {
      const double up = upstream.at(t, c);
      const double m_eps = M.at(t, c) + p.eps;
      const double denom = std::pow(m_eps, p.alpha[c]);
      const double gain = E.at(t, c) / denom;
      const double inner = gain + p.delta[c];
      const double rr = p.r[c];
      const double inner_rm1 = std::pow(inner, rr - 1.0);
      const double d_gain = rr * inner_rm1;

      g.d_r[c] += up * (std::pow(inner, rr) * std::log(inner) -
                        std::pow(p.delta[c], rr) * std::log(p.delta[c]));
      g.d_delta[c] +=
          up * rr * (inner_rm1 - std::pow(p.delta[c], rr - 1.0));
      g.d_alpha[c] += up * d_gain * (-gain * std::log(m_eps));
      dE_direct.at(t, c) = up * d_gain / denom;
      direct_M.at(t, c) = up * d_gain * (-gain * p.alpha[c] / m_eps);
    }
  }

  std::vector<double> lambda_next(C, 0.0);
  for (int t = T - 1; t >= 0; --t) {
    for (int c = 0; c < C; ++c) {
      const double sc = s_for_channel(p.s, c);
      const double lambda = direct_M.at(t, c) + (1.0 - sc) * lambda_next[c];
      if (t == 0) {
        // M(0) = E(0) directly, with no s factor.
        g.d_E.at(0, c) = dE_direct.at(0, c) + lambda;
      } else {
        g.d_E.at(t, c) = dE_direct.at(t, c) + lambda * sc;
        const double ds = lambda * (E.at(t, c) - M.at(t - 1, c));
        g.d_s[p.s.size() == 1 ? 0 : c] += ds;
      }
      lambda_next[c] = lambda;
    }
  }
  return g;
}

}  // namespace avifront
