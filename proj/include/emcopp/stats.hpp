#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace emcopp {

double normal_pdf(double z);
double normal_cdf(double z);

// Inverse standard normal CDF (Wichura's AS 241, double precision).
// Requires 0 < p < 1.
double normal_quantile(double p);

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double gamma_q(double a, double x);

// Upper tail of the chi-squared distribution with `dof` degrees of freedom.
double chi_squared_tail(double statistic, int dof);

struct Chi2Result {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Pearson statistic of observed counts against the uniform distribution
// over the bins.
Chi2Result chi_squared_uniform(std::span<const std::uint64_t> counts);

double mean(std::span<const double> values);
// Sample variance with the N-1 denominator; 0 for fewer than two values.
double sample_variance(std::span<const double> values);
double sample_sd(std::span<const double> values);

}  // namespace emcopp
