#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace wmcusum {

/// SplitMix64 finalizer; used to turn (seed, stream, index, ...) tuples into well-spread seeds.
std::uint64_t mix64(std::uint64_t x);

/// Folds the given words into a single seed. Pure function of its arguments and their order.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words);

/// Seeded standard-normal source. Deterministic for a given seed on a given standard library.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double standard() { return unit_(engine_); }
    double next(double variance);

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> unit_{0.0, 1.0};
};

} // namespace wmcusum
