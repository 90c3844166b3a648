#include "quandary/analysis/blinding.hpp"

#include "quandary/common/error.hpp"
#include "quandary/common/hash.hpp"

namespace quandary {

bool blinding_bit(const std::string& pair_id, std::uint64_t seed) noexcept
{
    return (hash_with_seed(pair_id, seed) >> 63U) != 0;
}

BlindedPair assign_blinding(const std::string& pair_id, const std::string& quandary_id, const std::string& s1,
                            const std::string& s2, std::uint64_t seed)
{
    require(s1 != s2, ErrorCode::invalid_argument, "blinding needs two different systems");
    require(!pair_id.empty(), ErrorCode::invalid_argument, "blinding needs a pair id");
    const bool swap = blinding_bit(pair_id, seed);
    return {pair_id, quandary_id, swap ? s2 : s1, swap ? s1 : s2, seed};
}

Json to_json(const BlindedPair& b)
{
    return Json{{"pair_id", b.pair_id},
                {"quandary_id", b.quandary_id},
                {"label_A", b.label_a},
                {"label_B", b.label_b},
                {"seed", b.seed}};
}

BlindedPair parse_blinded_pair(const Json& j)
{
    BlindedPair b;
    try {
        b.pair_id = j.at("pair_id").get<std::string>();
        b.quandary_id = j.at("quandary_id").get<std::string>();
        b.label_a = j.at("label_A").get<std::string>();
        b.label_b = j.at("label_B").get<std::string>();
        b.seed = j.value("seed", std::uint64_t{0});
    } catch (const Json::exception& e) {
        fail(ErrorCode::schema, std::string("blinded pair: ") + e.what());
    }
    require(b.label_a != b.label_b, ErrorCode::schema, "pair '" + b.pair_id + "' has the same system on both sides");
    return b;
}

BlindingMap make_blinding_map(const std::vector<BlindedPair>& pairs)
{
    BlindingMap map;
    for (const auto& p : pairs) {
        require(map.emplace(p.pair_id, p).second, ErrorCode::conflict, "duplicate pair id '" + p.pair_id + "'");
    }
    return map;
}

BlindingMap load_blinding(const std::filesystem::path& path)
{
    std::vector<BlindedPair> pairs;
    for (const auto& j : read_jsonl(path)) {
        pairs.push_back(parse_blinded_pair(j));
    }
    return make_blinding_map(pairs);
}

}  // namespace quandary
