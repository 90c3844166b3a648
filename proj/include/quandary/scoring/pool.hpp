#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quandary/common/slot_template.hpp"
#include "quandary/llm/client.hpp"
#include "quandary/retrieval/index.hpp"

namespace quandary {

/// Few-shot prompt asking the completion backend for one principle. Slots:
/// {context}, {question}.
extern const char* const kDefaultElicitationTemplate;

struct PoolSources {
    const InvertedIndex* index = nullptr;
    std::size_t top_k = 10;

    CompletionClient* generator = nullptr;
    std::size_t generated_count = 3;
    std::uint64_t seed = 0;
    std::string elicitation_template = kDefaultElicitationTemplate;

    std::vector<Principle> handcrafted;
};

/// Asks the backend `count` times (seeds seed, seed+1, ...) and keeps the
/// first sentence of each reply as a generated principle. Empty replies and
/// exact repeats are skipped.
std::vector<Principle> generate_principles(const Quandary& quandary, CompletionClient& client, std::size_t count,
                                           std::uint64_t seed,
                                           const std::string& elicitation_template = kDefaultElicitationTemplate);

/// Retrieved top-k, then generated, then handcrafted principles, in that
/// order. Provenance is set per source; a later entry whose id already
/// appeared is skipped.
std::vector<Principle> build_pool(const Quandary& quandary, const PoolSources& sources);

}  // namespace quandary
