#pragma once

#include <cstddef>
#include <span>

namespace ccg::stats {

double mean(std::span<const double> x);
// Sum of squared deviations from the sample mean.
double centered_ss(std::span<const double> x, double mean);
// Sample variance with the n - 1 denominator.
double sample_variance(std::span<const double> x);

double normal_cdf(double z);
double normal_quantile(double p);
// Upper tail P(X > x) for a chi-square variable with `dof` degrees of freedom.
double chi2_sf(double x, double dof);

// Quantile of the chi-square distribution with one degree of freedom.
double chi2_1_quantile(double p);

}  // namespace ccg::stats
