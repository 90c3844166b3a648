#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quandary/common/io.hpp"

namespace quandary {

/// An ethical dilemma: one or more context paragraphs and the question they raise.
struct Quandary {
    std::string id;
    std::vector<std::string> context;
    std::string question;
    std::string source;

    /// Context paragraphs and question joined by single spaces; used as the
    /// retrieval query and as the scored text for lexical relevance.
    [[nodiscard]] std::string full_text() const;

    bool operator==(const Quandary&) const = default;
};

struct ReferenceAnswer {
    std::string quandary_id;
    std::string text;
    std::string author;

    bool operator==(const ReferenceAnswer&) const = default;
};

enum class Provenance { retrieved, generated, handcrafted, human };

std::string_view to_string(Provenance p) noexcept;
Provenance provenance_from_string(std::string_view s);

struct Principle {
    std::string id;
    std::string text;
    Provenance provenance = Provenance::retrieved;

    bool operator==(const Principle&) const = default;
};

enum class SplitName { train, validation, test };

std::string_view to_string(SplitName s) noexcept;

struct DatasetSplit {
    SplitName name = SplitName::train;
    std::vector<std::string> quandary_ids;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

struct CorpusStats {
    std::size_t sample_count = 0;
    MeanStd words_per_quandary;
    MeanStd sentences_per_quandary;
    MeanStd words_per_answer;
    MeanStd sentences_per_answer;
};

/// Collapses whitespace runs to a single space and trims both ends.
std::string normalize_whitespace(std::string_view text);

// JSON schema mapping. The parse_* functions validate and throw
// Error{schema} naming the offending field.
Json to_json(const Quandary& q);
Json to_json(const ReferenceAnswer& a);
Json to_json(const Principle& p);
Json to_json(const CorpusStats& s);
Quandary parse_quandary(const Json& j);
ReferenceAnswer parse_answer(const Json& j);
Principle parse_principle(const Json& j);

/// Loads a principle JSONL file (one principle per line); any invalid
/// record throws with its line number.
std::vector<Principle> load_principles(const std::filesystem::path& path);

}  // namespace quandary
