#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "quandary/corpus/types.hpp"

namespace quandary {

enum class Polarity { higher_better, lower_better };

std::string_view to_string(Polarity p) noexcept;
Polarity polarity_from_string(std::string_view s);

/// True when `a` ranks strictly ahead of `b` under `polarity`.
constexpr bool better(double a, double b, Polarity polarity) noexcept
{
    return polarity == Polarity::higher_better ? a > b : a < b;
}

struct ScoredPrinciple {
    Principle principle;
    double score = 0.0;
    std::string scorer_id;
    Polarity polarity = Polarity::higher_better;
};

Json to_json(const ScoredPrinciple& s);
ScoredPrinciple parse_scored_principle(const Json& j);

/// Orders by score under `polarity`, ties by ascending principle id.
void sort_ranked(std::vector<ScoredPrinciple>& items);

struct Posting {
    std::uint32_t doc = 0;
    std::uint32_t term_frequency = 0;

    bool operator==(const Posting&) const = default;
};

/// Term -> posting list over an immutable principle collection.
class InvertedIndex {
  public:
    /// Throws Error{empty_input} for an empty collection.
    static InvertedIndex build(std::vector<Principle> principles);

    /// Line-delimited JSON with a versioned header record.
    void save(const std::filesystem::path& path) const;
    static InvertedIndex load(const std::filesystem::path& path);

    [[nodiscard]] const std::vector<Principle>& documents() const noexcept { return docs_; }
    [[nodiscard]] std::size_t doc_count() const noexcept { return docs_.size(); }
    [[nodiscard]] std::uint32_t length(std::uint32_t doc) const { return lengths_.at(doc); }
    [[nodiscard]] double average_length() const noexcept { return avg_length_; }
    [[nodiscard]] std::size_t document_frequency(const std::string& term) const;
    [[nodiscard]] std::span<const Posting> postings(const std::string& term) const;
    [[nodiscard]] std::size_t term_count() const noexcept { return postings_.size(); }

    static constexpr int kFormatVersion = 1;

  private:
    std::vector<Principle> docs_;
    std::vector<std::uint32_t> lengths_;
    double avg_length_ = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Robertson/Sparck Jones IDF with 0.5 smoothing, floored at zero.
double bm25_idf(std::size_t doc_count, std::size_t document_frequency);

/// Scores every indexed principle against `query` (distinct query terms,
/// each counted once) and returns the best min(k, doc_count) in descending
/// score order, ties by ascending id. Scorer id "bm25", higher_better.
std::vector<ScoredPrinciple> retrieve_top_k(const InvertedIndex& index, std::string_view query,
                                            std::size_t k = 10, const Bm25Params& params = {});

/// Query is the quandary's context followed by its question.
std::vector<ScoredPrinciple> retrieve_top_k(const InvertedIndex& index, const Quandary& quandary,
                                            std::size_t k = 10, const Bm25Params& params = {});

}  // namespace quandary
