#pragma once

#include <cstdint>

namespace nlisim {

// SplitMix64 finalizer. Used to turn structured seeds (seed ^ index) into
// well-separated generator seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for step `index` of a scan driven by `seed`.
constexpr std::uint64_t step_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return seed ^ index;
}

// Seed for map cell (i, j); independent of evaluation order.
constexpr std::uint64_t cell_seed(std::uint64_t master, std::uint64_t i, std::uint64_t j) noexcept {
    return master ^ mix64((j << 32) | (i & 0xffffffffULL));
}

} // namespace nlisim
