#include "tsg/common.hpp"

#include <cmath>

namespace tsg {

double normalize_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
    if (a <= -kPi) {
        a += 2.0 * kPi;
    }
    return a;
}

Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace tsg
