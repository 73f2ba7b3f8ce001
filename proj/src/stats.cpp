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

#include "avifront/stats.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "avifront/rng.h"

namespace avifront {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sqr(double x) { return x * x; }

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_ppf(double p) {
  // Wichura, Applied Statistics 37 (1988), algorithm AS 241 (PPND16).
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError("normal_ppf: p must be in (0, 1)");
  }
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) *
                    r +
                4.5921953931549871457e4) *
                   r +
               1.3731693765509461125e4) *
                  r +
              1.9715909503065514427e3) *
                 r +
             1.3314166789178437745e2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) *
                    r +
                2.1213794301586595867e4) *
                   r +
               5.3941960214247511077e3) *
                  r +
              6.8718700749205790830e2) *
                 r +
             4.2313330701600911252e1) *
                r +
            1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) *
                      r +
                  2.41780725177450611770e-1) *
                     r +
                 1.27045825245236838258e0) *
                    r +
                3.64784832476320460504e0) *
                   r +
               5.76949722146069140550e0) *
                  r +
              4.63033784615654529590e0) *
                 r +
             1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) *
                      r +
                  1.51986665636164571966e-2) *
                     r +
                 1.48103976427480074590e-1) *
                    r +
                6.89767334985100004550e-1) *
                   r +
               1.67638483018380384940e0) *
                  r +
              2.05319162663775882187e0) *
                 r +
             1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) *
                      r +
                  1.24266094738807843860e-3) *
                     r +
                 2.65321895265761230930e-2) *
                    r +
                2.96560571828504891230e-1) *
                   r +
               1.78482653991729133580e0) *
                  r +
              5.46378491116411436990e0) *
                 r +
             6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r +
                   1.42151175831644588870e-7) *
                      r +
                  1.84631831751005468180e-5) *
                     r +
                 7.86869131145613259100e-4) *
                    r +
                1.48753612908506148525e-2) *
                   r +
               1.36929880922735805310e-1) *
                  r +
              5.99832206555887937690e-1) *
                 r +
             1.0);
  }
  return q < 0.0 ? -value : value;
}

namespace {

// Lentz's continued fraction for the incomplete beta function.
double beta_cf(double a, double b, double x) {
  const int max_iter = 300;
  const double eps = 3.0e-16;
  const double fpmin = 1.0e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) {
    throw ConfigError("incomplete_beta: a and b must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_cf(a, b, x) / a;
  }
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double f_sf(double F, double df1, double df2) {
  if (F <= 0.0) return 1.0;
  return incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * F));
}

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on the
// Legendre recurrence), cached per order.
void gauss_legendre(int n, std::vector<double>* nodes,
                    std::vector<double>* weights) {
  nodes->assign(n, 0.0);
  weights->assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double z_prev;
    double pp = 0.0;
    do {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      z_prev = z;
      z = z_prev - p0 / pp;
    } while (std::fabs(z - z_prev) > 1e-15);
    (*nodes)[i] = -z;
    (*nodes)[n - 1 - i] = z;
    (*weights)[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    (*weights)[n - 1 - i] = (*weights)[i];
  }
}

const std::vector<double>& gl_nodes64() {
  static std::vector<double> nodes, weights;
  if (nodes.empty()) gauss_legendre(64, &nodes, &weights);
  return nodes;
}

const std::vector<double>& gl_weights64() {
  static std::vector<double> nodes, weights;
  if (weights.empty()) gauss_legendre(64, &nodes, &weights);
  return weights;
}

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
}

// P(range of k standard normals <= w).
double normal_range_cdf(double w, int k) {
  if (w <= 0.0) return 0.0;
  const auto& xs = gl_nodes64();
  const auto& ws = gl_weights64();
  const double lo = -9.0;
  const double hi = 9.0;
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double total = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double z = mid + half * xs[i];
    const double inner = normal_cdf(z) - normal_cdf(z - w);
    total += ws[i] * normal_pdf(z) * std::pow(inner, k - 1);
  }
  return std::min(1.0, k * half * total);
}

}  // namespace

double studentized_range_cdf(double q, int k, double df) {
  if (k < 2) throw ConfigError("studentized_range_cdf: k must be >= 2");
  if (df < 1.0) throw ConfigError("studentized_range_cdf: df must be >= 1");
  if (q <= 0.0) return 0.0;
  // Outer integral over the scale s ~ chi_df / sqrt(df), with density
  // f(s) = C * s^(df-1) * exp(-df s^2 / 2); log C = (df/2) log(df/2)
  //   - lgamma(df/2) + log(2) ... folded below via exp of the log density.
  const double ln_c = 0.5 * df * std::log(0.5 * df) - std::lgamma(0.5 * df) +
                      std::log(2.0);
  const double s_hi =
      std::sqrt((df + 12.0 * std::sqrt(2.0 * df) + 50.0) / df);
  const auto& xs = gl_nodes64();
  const auto& ws = gl_weights64();
  const double panel_edges[3] = {0.0, 1.0, s_hi};
  double total = 0.0;
  for (int panel = 0; panel < 2; ++panel) {
    const double lo = panel_edges[panel];
    const double hi = panel_edges[panel + 1];
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double acc = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
      const double s = mid + half * xs[i];
      if (s <= 0.0) continue;
      const double ln_density = ln_c + (df - 1.0) * std::log(s) -
                                0.5 * df * s * s;
      acc += ws[i] * std::exp(ln_density) * normal_range_cdf(q * s, k);
    }
    total += half * acc;
  }
  return std::min(1.0, total);
}

double studentized_range_sf(double q, int k, double df) {
  return 1.0 - studentized_range_cdf(q, k, df);
}

double studentized_range_crit(double alpha, int k, double df) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("studentized_range_crit: alpha must be in (0, 1)");
  }
  double lo = 1e-3;
  double hi = 100.0;
  for (int iter = 0; iter < 100; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (studentized_range_sf(mid, k, df) > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-10) break;
  }
  return 0.5 * (lo + hi);
}

double accuracy(const std::vector<int>& predictions,
                const std::vector<int>& labels) {
  if (predictions.empty() || predictions.size() != labels.size()) {
    throw ConfigError("accuracy: prediction/label size mismatch");
  }
  size_t hits = 0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

std::vector<std::vector<size_t>> bootstrap_indices(size_t test_size,
                                                   int n_subsets,
                                                   int subset_size,
                                                   uint64_t seed) {
  if (test_size == 0) throw ConfigError("bootstrap_indices: empty test set");
  if (n_subsets < 1 || subset_size < 1) {
    throw ConfigError("bootstrap_indices: n_subsets and subset_size must be >= 1");
  }
  Rng rng(seed);
  std::vector<std::vector<size_t>> subsets(n_subsets);
  for (auto& subset : subsets) {
    subset.resize(subset_size);
    for (int i = 0; i < subset_size; ++i) {
      subset[i] = static_cast<size_t>(rng.below(test_size));
    }
  }
  return subsets;
}

std::vector<AccuracySamples> bootstrap_subsets(
    const std::vector<std::string>& system_names,
    const std::vector<std::vector<int>>& predictions_per_system,
    const std::vector<int>& labels, int n_subsets, int subset_size,
    uint64_t seed) {
  if (system_names.size() != predictions_per_system.size()) {
    throw ConfigError("bootstrap_subsets: name/prediction count mismatch");
  }
  for (const auto& preds : predictions_per_system) {
    if (preds.size() != labels.size()) {
      throw ConfigError("bootstrap_subsets: prediction/label size mismatch");
    }
  }
  const int effective_size =
      std::min<int>(subset_size, static_cast<int>(labels.size()));
  const auto subsets =
      bootstrap_indices(labels.size(), n_subsets, effective_size, seed);
  std::vector<AccuracySamples> out(system_names.size());
  for (size_t s = 0; s < system_names.size(); ++s) {
    out[s].system = system_names[s];
    out[s].values.reserve(subsets.size());
    for (const auto& subset : subsets) {
      size_t hits = 0;
      for (size_t idx : subset) {
        if (predictions_per_system[s][idx] == labels[idx]) ++hits;
      }
      out[s].values.push_back(static_cast<double>(hits) /
                              static_cast<double>(subset.size()));
    }
  }
  return out;
}

ShapiroResult shapiro_wilk(const std::vector<double>& x) {
  // Royston (1995), algorithm AS R94.
  const int n = static_cast<int>(x.size());
  if (n < 3) throw ConfigError("shapiro_wilk: need at least 3 samples");
  if (n > 5000) throw ConfigError("shapiro_wilk: n > 5000 unsupported");
  std::vector<double> y(x);
  std::sort(y.begin(), y.end());
  if (y.back() - y.front() <= 0.0) {
    throw DataError("shapiro_wilk: zero-variance sample");
  }

  std::vector<double> m(n);
  double ssq_m = 0.0;
  for (int i = 0; i < n; ++i) {
    m[i] = normal_ppf((i + 1 - 0.375) / (n + 0.25));
    ssq_m += m[i] * m[i];
  }
  std::vector<double> a(n, 0.0);
  if (n == 3) {
    a[0] = -std::sqrt(0.5);
    a[2] = std::sqrt(0.5);
  } else {
    const double rsn = 1.0 / std::sqrt(static_cast<double>(n));
    const double norm_m = std::sqrt(ssq_m);
    auto poly5 = [&](double c1, double c2, double c3, double c4, double c5,
                     double base) {
      return base + rsn * (c5 + rsn * (c4 + rsn * (c3 + rsn * (c2 + rsn * c1))));
    };
    a[n - 1] = poly5(-2.706056, 4.434685, -2.071190, -0.147981, 0.221157,
                     m[n - 1] / norm_m);
    double phi;
    int first_interior;
    if (n > 5) {
      a[n - 2] = poly5(-3.582633, 5.682633, -1.752461, -0.293762, 0.042981,
                       m[n - 2] / norm_m);
      phi = (ssq_m - 2.0 * sqr(m[n - 1]) - 2.0 * sqr(m[n - 2])) /
            (1.0 - 2.0 * sqr(a[n - 1]) - 2.0 * sqr(a[n - 2]));
      a[1] = -a[n - 2];
      first_interior = 2;
    } else {
      phi = (ssq_m - 2.0 * sqr(m[n - 1])) / (1.0 - 2.0 * sqr(a[n - 1]));
      first_interior = 1;
    }
    a[0] = -a[n - 1];
    const double sqrt_phi = std::sqrt(phi);
    for (int i = first_interior; i < n - first_interior; ++i) {
      a[i] = m[i] / sqrt_phi;
    }
  }

  const double mean_y = mean_of(y);
  double numerator = 0.0;
  double denominator = 0.0;
  for (int i = 0; i < n; ++i) {
    numerator += a[i] * y[i];
    denominator += sqr(y[i] - mean_y);
  }
  if (denominator <= 0.0) {
    throw DataError("shapiro_wilk: zero-variance sample");
  }
  double W = sqr(numerator) / denominator;
  W = std::min(W, 1.0);

  ShapiroResult result;
  result.W = W;
  if (n == 3) {
    const double p =
        (6.0 / kPi) * (std::asin(std::sqrt(W)) - std::asin(std::sqrt(0.75)));
    result.p_value = std::clamp(p, 0.0, 1.0);
    return result;
  }
  double z;
  if (n <= 11) {
    const double nn = static_cast<double>(n);
    const double gamma = -2.273 + 0.459 * nn;
    const double w1 = -std::log(gamma - std::log1p(-W));
    const double mu =
        0.5440 - 0.39978 * nn + 0.025054 * nn * nn - 0.0006714 * nn * nn * nn;
    const double sigma = std::exp(1.3822 - 0.77857 * nn + 0.062767 * nn * nn -
                                  0.0020322 * nn * nn * nn);
    z = (w1 - mu) / sigma;
  } else {
    const double u = std::log(static_cast<double>(n));
    const double w1 = std::log1p(-W);
    const double mu = -1.5861 - 0.31082 * u - 0.083751 * u * u +
                      0.0038915 * u * u * u;
    const double sigma = std::exp(-0.4803 - 0.082676 * u + 0.0030302 * u * u);
    z = (w1 - mu) / sigma;
  }
  result.p_value = 1.0 - normal_cdf(z);
  return result;
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
  const int k = static_cast<int>(groups.size());
  if (k < 2) throw ConfigError("anova_oneway: need at least 2 groups");
  size_t total_n = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) {
      throw ConfigError("anova_oneway: each group needs at least 2 samples");
    }
    total_n += g.size();
  }
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    for (double v : g) grand_sum += v;
  }
  const double grand_mean = grand_sum / static_cast<double>(total_n);
  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& g : groups) {
    const double gm = mean_of(g);
    ss_between += static_cast<double>(g.size()) * sqr(gm - grand_mean);
    for (double v : g) ss_within += sqr(v - gm);
  }
  AnovaResult result;
  result.df_between = k - 1;
  result.df_within = static_cast<int>(total_n) - k;
  result.ms_within = ss_within / result.df_within;
  const double ms_between = ss_between / result.df_between;
  if (ss_within <= 0.0) {
    throw DataError("anova_oneway: zero within-group variance");
  }
  result.F = ms_between / result.ms_within;
  result.p_value = f_sf(result.F, result.df_between, result.df_within);
  return result;
}

TukeyResult tukey_hsd(const std::vector<std::vector<double>>& groups,
                      double alpha) {
  const int k = static_cast<int>(groups.size());
  if (k < 2) throw ConfigError("tukey_hsd: need at least 2 groups");
  size_t total_n = 0;
  std::vector<double> means(k);
  for (int i = 0; i < k; ++i) {
    if (groups[i].size() < 2) {
      throw ConfigError("tukey_hsd: each group needs at least 2 samples");
    }
    total_n += groups[i].size();
    means[i] = mean_of(groups[i]);
  }
  double ss_within = 0.0;
  for (int i = 0; i < k; ++i) {
    for (double v : groups[i]) ss_within += sqr(v - means[i]);
  }
  TukeyResult result;
  result.df_within = static_cast<int>(total_n) - k;
  result.ms_within = ss_within / result.df_within;
  if (result.ms_within <= 0.0) {
    throw DataError("tukey_hsd: zero within-group variance");
  }
  result.q_crit = studentized_range_crit(alpha, k, result.df_within);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      TukeyPair pair;
      pair.i = i;
      pair.j = j;
      pair.mean_diff = means[i] - means[j];
      const double se = std::sqrt(
          0.5 * result.ms_within * (1.0 / groups[i].size() +
                                    1.0 / groups[j].size()));
      pair.q_stat = std::fabs(pair.mean_diff) / se;
      pair.p_value = studentized_range_sf(pair.q_stat, k, result.df_within);
      pair.significant = pair.q_stat > result.q_crit;
      result.pairs.push_back(pair);
    }
  }
  return result;
}

std::string to_string(PairSignificance s) {
  switch (s) {
    case PairSignificance::NotSignificant:
      return "ns";
    case PairSignificance::SignificantPerDataset:
      return "per-dataset";
    case PairSignificance::SignificantOverall:
      return "overall";
  }
  return "ns";
}

namespace {

// Degenerate-variance fallback: identical samples within every group mean
// any nonzero mean difference separates the pair exactly.
TukeyResult degenerate_tukey(const std::vector<std::vector<double>>& groups) {
  const int k = static_cast<int>(groups.size());
  std::vector<double> means(k);
  for (int i = 0; i < k; ++i) means[i] = mean_of(groups[i]);
  TukeyResult result;
  result.q_crit = std::numeric_limits<double>::infinity();
  result.df_within = 0;
  result.ms_within = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      TukeyPair pair;
      pair.i = i;
      pair.j = j;
      pair.mean_diff = means[i] - means[j];
      const bool differ = std::fabs(pair.mean_diff) > 0.0;
      pair.q_stat = differ ? std::numeric_limits<double>::infinity() : 0.0;
      pair.p_value = differ ? 0.0 : 1.0;
      pair.significant = differ;
      result.pairs.push_back(pair);
    }
  }
  return result;
}

TukeyResult tukey_or_degenerate(const std::vector<std::vector<double>>& groups,
                                double alpha) {
  try {
    return tukey_hsd(groups, alpha);
  } catch (const DataError&) {
    return degenerate_tukey(groups);
  }
}

}  // namespace

SignificanceReport significance_pipeline(
    const std::vector<AccuracySamples>& overall,
    const std::vector<DatasetSamples>& per_dataset, double alpha) {
  const int k = static_cast<int>(overall.size());
  if (k < 2) {
    throw ConfigError("significance_pipeline: need at least 2 systems");
  }
  for (const auto& ds : per_dataset) {
    if (static_cast<int>(ds.systems.size()) != k) {
      throw ConfigError(
          "significance_pipeline: per-dataset system count mismatch");
    }
  }

  SignificanceReport report;
  for (const auto& s : overall) report.systems.push_back(s.system);
  report.matrix.systems = report.systems;
  report.matrix.cells.assign(static_cast<size_t>(k) * k,
                             PairSignificance::NotSignificant);

  char buf[256];
  for (const auto& s : overall) {
    try {
      const ShapiroResult sw = shapiro_wilk(s.values);
      if (sw.p_value < 0.05) {
        std::snprintf(buf, sizeof(buf),
                      "%s: subset accuracies deviate from normality "
                      "(W=%.4f, p=%.4g)",
                      s.system.c_str(), sw.W, sw.p_value);
        report.normality_warnings.push_back(buf);
      }
    } catch (const DataError&) {
      std::snprintf(buf, sizeof(buf),
                    "%s: subset accuracies are constant; normality test "
                    "skipped",
                    s.system.c_str());
      report.normality_warnings.push_back(buf);
    }
  }

  std::vector<std::vector<double>> groups;
  groups.reserve(overall.size());
  for (const auto& s : overall) groups.push_back(s.values);
  try {
    report.anova = anova_oneway(groups);
    report.anova_valid = true;
  } catch (const DataError&) {
    report.anova_valid = false;
  }

  const TukeyResult tukey = tukey_or_degenerate(groups, alpha);
  auto cell = [&](int i, int j) -> PairSignificance& {
    return report.matrix.cells[static_cast<size_t>(i) * k + j];
  };
  for (const auto& pair : tukey.pairs) {
    SignificanceReport::Row row;
    row.system_a = report.systems[pair.i];
    row.system_b = report.systems[pair.j];
    row.scope = "overall";
    row.q = pair.q_stat;
    row.p = pair.p_value;
    row.significant = pair.significant;
    report.rows.push_back(row);
    if (pair.significant) {
      cell(pair.i, pair.j) = PairSignificance::SignificantOverall;
      cell(pair.j, pair.i) = PairSignificance::SignificantOverall;
      continue;
    }
    // Fallback: a pair tied overall may still separate on one dataset.
    for (const auto& ds : per_dataset) {
      std::vector<std::vector<double>> pair_groups = {
          ds.systems[pair.i].values, ds.systems[pair.j].values};
      const TukeyResult per = tukey_or_degenerate(pair_groups, alpha);
      SignificanceReport::Row ds_row;
      ds_row.system_a = report.systems[pair.i];
      ds_row.system_b = report.systems[pair.j];
      ds_row.scope = ds.dataset;
      ds_row.q = per.pairs[0].q_stat;
      ds_row.p = per.pairs[0].p_value;
      ds_row.significant = per.pairs[0].significant;
      report.rows.push_back(ds_row);
      if (ds_row.significant &&
          cell(pair.i, pair.j) == PairSignificance::NotSignificant) {
        cell(pair.i, pair.j) = PairSignificance::SignificantPerDataset;
        cell(pair.j, pair.i) = PairSignificance::SignificantPerDataset;
      }
    }
  }
  return report;
}

std::string render_significance_text(const SignificanceReport& report) {
  std::ostringstream out;
  char buf[256];
  out << "Significance report (Tukey HSD on paired bootstrap subsets)\n";
  for (const auto& warning : report.normality_warnings) {
    out << "warning: " << warning << "\n";
  }
  if (report.anova_valid) {
    std::snprintf(buf, sizeof(buf),
                  "ANOVA: F(%d, %d) = %.6g, p = %.6g\n",
                  report.anova.df_between, report.anova.df_within,
                  report.anova.F, report.anova.p_value);
    out << buf;
  } else {
    out << "ANOVA: skipped (zero within-group variance)\n";
  }
  const int k = static_cast<int>(report.systems.size());
  size_t width = 8;
  for (const auto& s : report.systems) width = std::max(width, s.size() + 1);
  out << "\nPairwise matrix (overall / per-dataset / ns):\n";
  out << std::string(width, ' ');
  for (const auto& s : report.systems) {
    std::snprintf(buf, sizeof(buf), "%*s", static_cast<int>(width), s.c_str());
    out << buf;
  }
  out << "\n";
  for (int i = 0; i < k; ++i) {
    std::snprintf(buf, sizeof(buf), "%-*s", static_cast<int>(width),
                  report.systems[i].c_str());
    out << buf;
    for (int j = 0; j < k; ++j) {
      const std::string label =
          i == j ? "-" : to_string(report.matrix.at(i, j));
      std::snprintf(buf, sizeof(buf), "%*s", static_cast<int>(width),
                    label.c_str());
      out << buf;
    }
    out << "\n";
  }
  out << "\nPairwise tests:\n";
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%s vs %s [%s]: q = %.4f, p = %.4g, %s\n",
                  row.system_a.c_str(), row.system_b.c_str(),
                  row.scope.c_str(), row.q, row.p,
                  row.significant ? "significant" : "not significant");
    out << buf;
  }
  return out.str();
}

std::string significance_csv(const SignificanceReport& report) {
  std::ostringstream out;
  out << "system_a,system_b,scope,q,p,significant\n";
  char buf[256];
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.17g,%.17g,%d\n",
                  row.system_a.c_str(), row.system_b.c_str(),
                  row.scope.c_str(), row.q, row.p, row.significant ? 1 : 0);
    out << buf;
  }
  return out.str();
}

}  // namespace avifront
