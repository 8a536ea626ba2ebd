#include "wmcusum/random.hpp"

#include <cmath>

namespace wmcusum {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (auto w : words) {
        h = mix64(h ^ mix64(w));
    }
    return h;
}

double GaussianStream::next(double variance) {
    const double z = standard();
    return variance == 0.0 ? 0.0 : std::sqrt(variance) * z;
}

} // namespace wmcusum
