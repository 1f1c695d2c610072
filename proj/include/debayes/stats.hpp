#pragma once

#include <cstddef>
#include <vector>

namespace debayes::stats {

// Empirical quantile: linear interpolation between order statistics at
// position q * (B - 1), i.e. index q*(B-1)+1 in 1-based terms.
double quantile(std::vector<double> values, double q);
double quantile_sorted(const std::vector<double>& sorted, double q);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // denominator n - 1
double skewness(const std::vector<double>& v);
double excess_kurtosis(const std::vector<double>& v);

// Inverse standard normal CDF (Acklam's rational approximation polished by
// one Halley step; ~1e-15 absolute accuracy).
double normal_quantile(double prob);

// One-sample Kolmogorov-Smirnov statistic against a CDF given as a callable
// evaluated at the sorted sample points.
template <typename Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, f - lo, hi - f});
  }
  return d;
}

// Asymptotic critical value for the one-sample KS test.
double ks_critical_value(std::size_t n, double alpha);

}  // namespace debayes::stats
