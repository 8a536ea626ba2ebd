#pragma once

#include <cstddef>
#include <span>

namespace wmcusum::stats {

double mean(std::span<const double> xs);
/// Unbiased sample variance.
double variance(std::span<const double> xs);
/// Sample covariance of equal-length sequences.
double covariance(std::span<const double> xs, std::span<const double> ys);
double correlation(std::span<const double> xs, std::span<const double> ys);
/// Sample autocorrelation at the given lag.
double autocorrelation(std::span<const double> xs, std::size_t lag);

} // namespace wmcusum::stats
