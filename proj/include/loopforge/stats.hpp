#pragma once

#include <vector>

#include "loopforge/errors.hpp"

namespace loopforge {

struct KsResult {
  double statistic = 0.0;
  double p = 1.0;
  double n_eff = 0.0;  // effective combined sample size used for the p-value
};

struct Chi2Result {
  double statistic = 0.0;
  int dof = 0;
  double p = 1.0;
};

// Survival function of the Kolmogorov distribution at lambda.
double kolmogorov_q(double lambda);

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value (including
// the small-sample correction of the effective size).  Requires >= 50 samples
// on each side (TooFewSamples).
KsResult ks_two_sample(std::vector<double> xs, std::vector<double> ys);

// Weighted variant: each sample carries a nonnegative importance weight; the
// ECDFs are weight-normalized and the effective sizes are Kish ratios
// (sum w)^2 / sum w^2.
KsResult ks_two_sample_weighted(std::vector<double> xs, std::vector<double> wx,
                                std::vector<double> ys, std::vector<double> wy);

// One-sample KS against the uniform law on [0,1] (used by the calibration
// meta-test on p-values).
KsResult ks_uniform(std::vector<double> xs);

// Chi-square statistic against the stated expectation with explicit degrees
// of freedom; expected entries must be positive.
Chi2Result chi_square(const std::vector<double>& observed,
                      const std::vector<double>& expected, int dof);

// Counts against the uniform expectation, dof = k - 1.
Chi2Result chi_square_uniform(const std::vector<long long>& counts);

// Independence in a 2x2 contingency table, dof = 1.
Chi2Result chi_square_independence(long long n00, long long n01, long long n10,
                                   long long n11);

// Homogeneity of two count rows over the same categories (dof = k - 1).
Chi2Result chi_square_homogeneity(const std::vector<long long>& row1,
                                  const std::vector<long long>& row2);

// Total-variation distance between two pmfs over the same support.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

double mean(const std::vector<double>& xs);
double sample_stddev(const std::vector<double>& xs);
double standard_error(const std::vector<double>& xs);

// Pearson correlation of paired samples.
double correlation(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace loopforge
