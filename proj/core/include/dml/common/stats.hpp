#pragma once

#include <span>
#include <vector>

namespace dml {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile. Rational approximation refined by one Halley
/// step, absolute error below 1e-12 on (1e-300, 1 - 1e-16).
double normal_quantile(double p);

/// Lower median: for even sizes returns the lower of the two middle values.
double lower_median(std::vector<double> values);

double mean(std::span<const double> values);

/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> values);

}  // namespace dml
