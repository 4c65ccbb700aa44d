#include "ccg/stats.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "ccg/simd.hpp"

namespace ccg::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  return simd::sum(x) / static_cast<double>(x.size());
}

double centered_ss(std::span<const double> x, double m) { return simd::sum_sq_dev(x, m); }

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return centered_ss(x, mean(x)) / static_cast<double>(x.size() - 1);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<>(), p); }

double chi2_sf(double x, double dof) {
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<>(dof), x));
}

double chi2_1_quantile(double p) {
  const double e = boost::math::erf_inv(p);
  return 2.0 * e * e;
}

}  // namespace ccg::stats
