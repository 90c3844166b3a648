#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace quandary {

// Stable across processes and platforms, unlike std::hash.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t state = 0xcbf29ce484222325ULL) noexcept
{
    for (unsigned char c : bytes) {
        state ^= c;
        state *= 0x100000001b3ULL;
    }
    return state;
}

/// splitmix64 finalizer; spreads low-entropy inputs over all 64 bits.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31U);
}

constexpr std::uint64_t hash_with_seed(std::string_view bytes, std::uint64_t seed) noexcept
{
    return mix64(fnv1a64(bytes) ^ mix64(seed));
}

std::string to_hex(std::uint64_t value, int digits = 16);

}  // namespace quandary
