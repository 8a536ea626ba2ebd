#include "wmcusum/stats.hpp"

#include <cmath>

#include "wmcusum/errors.hpp"

namespace wmcusum::stats {

double mean(std::span<const double> xs) {
    if (xs.empty()) {
        throw InvalidParameter("mean of an empty sample");
    }
    double s = 0.0;
    for (double x : xs) {
        s += x;
    }
    return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) { return covariance(xs, xs); }

double covariance(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw InvalidParameter("covariance needs two equal-length samples of size >= 2");
    }
    const double mx = mean(xs);
    const double my = mean(ys);
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        s += (xs[i] - mx) * (ys[i] - my);
    }
    return s / static_cast<double>(xs.size() - 1);
}

double correlation(std::span<const double> xs, std::span<const double> ys) {
    return covariance(xs, ys) / std::sqrt(variance(xs) * variance(ys));
}

double autocorrelation(std::span<const double> xs, std::size_t lag) {
    if (lag + 2 > xs.size()) {
        throw InvalidParameter("autocorrelation lag too large for the sample");
    }
    return correlation(xs.subspan(lag), xs.first(xs.size() - lag));
}

} // namespace wmcusum::stats
