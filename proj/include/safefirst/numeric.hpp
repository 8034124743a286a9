#pragma once

#include <span>

namespace safefirst {

/// Pairwise (cascade) summation with a fixed split order. The result depends
/// only on the input sequence, never on thread scheduling.
double pairwise_sum(std::span<const double> values);

/// Arithmetic mean via pairwise_sum. Empty input returns 0.
double pairwise_mean(std::span<const double> values);

long double normal_pdf(long double z);

/// Standard normal CDF via erfc, accurate in both tails.
long double normal_cdf(long double z);

/// Standard normal quantile. Acklam's rational approximation followed by one
/// Halley step against erfc, giving close to full double precision.
/// Requires 0 < p < 1.
double normal_quantile(double p);

}  // namespace safefirst
