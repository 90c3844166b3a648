#include "quandary/common/hash.hpp"

#include "quandary/common/rng.hpp"

namespace quandary {

std::string to_hex(std::uint64_t value, int digits)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(static_cast<std::size_t>(digits), '0');
    for (int i = digits - 1; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[value & 0xfU];
        value >>= 4U;
    }
    return out;
}

std::uint64_t DeterministicRng::below(std::uint64_t bound)
{
    if (bound <= 1) {
        return 0;
    }
    // Largest multiple of bound representable; reject the biased tail.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t draw = engine_();
    while (draw >= limit) {
        draw = engine_();
    }
    return draw % bound;
}

}  // namespace quandary
