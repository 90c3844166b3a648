#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "quandary/common/io.hpp"

namespace quandary {

/// Server-side record of which system sits behind label A and label B.
struct BlindedPair {
    std::string pair_id;
    std::string quandary_id;
    std::string label_a;
    std::string label_b;
    std::uint64_t seed = 0;

    bool operator==(const BlindedPair&) const = default;
};

using BlindingMap = std::map<std::string, BlindedPair>;

/// The A/B order is one bit of hash(pair_id, seed): when set, s2 takes
/// label A. Throws Error{invalid_argument} when s1 == s2.
BlindedPair assign_blinding(const std::string& pair_id, const std::string& quandary_id, const std::string& s1,
                            const std::string& s2, std::uint64_t seed);

bool blinding_bit(const std::string& pair_id, std::uint64_t seed) noexcept;

Json to_json(const BlindedPair& b);
BlindedPair parse_blinded_pair(const Json& j);

/// JSONL, one pair per line. Duplicate pair ids throw Error{conflict}.
BlindingMap load_blinding(const std::filesystem::path& path);
BlindingMap make_blinding_map(const std::vector<BlindedPair>& pairs);

}  // namespace quandary
