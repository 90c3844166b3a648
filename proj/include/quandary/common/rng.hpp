#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace quandary {

/// Seeded generator whose outputs are identical on every standard library.
/// std::mt19937_64 is fully specified; the distributions in <random> are not,
/// so sampling helpers live here.
class DeterministicRng {
  public:
    explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound) by rejection sampling.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform real in [0, 1) from the top 53 bits.
    double unit() { return static_cast<double>(engine_() >> 11U) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace quandary
