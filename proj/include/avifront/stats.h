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

#include <string>
#include <vector>

#include "avifront/types.h"

namespace avifront {

// --- special functions ----------------------------------------------------

double normal_cdf(double x);
/// Inverse standard normal CDF (Wichura's PPND16 rational approximation).
double normal_ppf(double p);
/// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);
/// Survival function of the F distribution with (df1, df2) degrees of freedom.
double f_sf(double F, double df1, double df2);

/// Studentized range distribution for k groups and df error degrees of
/// freedom, by nested Gauss-Legendre quadrature: the outer integral over the
/// chi-distributed scale, the inner over the normal range CDF.
double studentized_range_cdf(double q, int k, double df);
double studentized_range_sf(double q, int k, double df);
/// Critical value q with sf(q) = alpha, by bisection.
double studentized_range_crit(double alpha, int k, double df);

// --- tests ------------------------------------------------------------------

double accuracy(const std::vector<int>& predictions,
                const std::vector<int>& labels);

struct AccuracySamples {
  std::string system;
  std::vector<double> values;  // one accuracy per bootstrap subset
};

/// With-replacement index draws shared by all systems (paired sampling).
std::vector<std::vector<size_t>> bootstrap_indices(size_t test_size,
                                                   int n_subsets,
                                                   int subset_size,
                                                   uint64_t seed);

/// Paired bootstrap subset accuracies: the same index sets are used for
/// every system.
std::vector<AccuracySamples> bootstrap_subsets(
    const std::vector<std::string>& system_names,
    const std::vector<std::vector<int>>& predictions_per_system,
    const std::vector<int>& labels, int n_subsets, int subset_size,
    uint64_t seed);

struct ShapiroResult {
  double W = 0.0;
  double p_value = 0.0;
};

/// Royston's AS R94 approximation, 3 <= n <= 5000. Throws DataError on a
/// zero-variance sample.
ShapiroResult shapiro_wilk(const std::vector<double>& x);

struct AnovaResult {
  double F = 0.0;
  double p_value = 1.0;
  int df_between = 0;
  int df_within = 0;
  double ms_within = 0.0;
};

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

struct TukeyPair {
  int i = 0;
  int j = 0;
  double mean_diff = 0.0;
  double q_stat = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

struct TukeyResult {
  std::vector<TukeyPair> pairs;
  double q_crit = 0.0;
  double ms_within = 0.0;
  int df_within = 0;
};

/// Tukey HSD with the Tukey-Kramer adjustment for unequal group sizes.
TukeyResult tukey_hsd(const std::vector<std::vector<double>>& groups,
                      double alpha);

// --- pipeline ---------------------------------------------------------------

enum class PairSignificance { NotSignificant, SignificantPerDataset, SignificantOverall };

std::string to_string(PairSignificance s);

struct SignificanceMatrix {
  std::vector<std::string> systems;
  std::vector<PairSignificance> cells;  // row-major k x k

  PairSignificance at(int i, int j) const {
    return cells[static_cast<size_t>(i) * systems.size() + j];
  }
};

struct DatasetSamples {
  std::string dataset;
  std::vector<AccuracySamples> systems;  // same system order as overall
};

struct SignificanceReport {
  struct Row {
    std::string system_a, system_b, scope;
    double q = 0.0;
    double p = 1.0;
    bool significant = false;
  };

  std::vector<std::string> systems;
  std::vector<std::string> normality_warnings;
  bool anova_valid = false;
  AnovaResult anova;
  SignificanceMatrix matrix;
  std::vector<Row> rows;
};

/// Shapiro-Wilk per system (warnings only), one-way ANOVA, Tukey HSD on the
/// full test set; pairs without an overall difference are re-tested per
/// dataset and marked SignificantPerDataset if any dataset separates them.
SignificanceReport significance_pipeline(
    const std::vector<AccuracySamples>& overall,
    const std::vector<DatasetSamples>& per_dataset, double alpha = 0.05);

std::string render_significance_text(const SignificanceReport& report);
std::string significance_csv(const SignificanceReport& report);

}  // namespace avifront
