#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quandary/metrics/rouge.hpp"

namespace quandary {

inline constexpr int kBleuMaxOrder = 4;
/// Stand-in for zero n-gram matches in sentence-level BLEU.
inline constexpr double kSentenceBleuEpsilon = 0.01;

/// 13a-style tokenization: punctuation and symbols become separate tokens,
/// periods and commas are split unless between digits, case is preserved.
std::vector<std::string> tokenize_13a(std::string_view text);

/// Clipped n-gram match counts for orders 1..4 plus lengths.
struct BleuStats {
    std::array<std::size_t, kBleuMaxOrder> matches{};
    std::array<std::size_t, kBleuMaxOrder> totals{};
    std::size_t candidate_length = 0;
    std::size_t reference_length = 0;

    BleuStats& operator+=(const BleuStats& other) noexcept;
};

BleuStats bleu_stats(std::span<const std::string> candidate, std::span<const std::string> reference);

/// 0..100. With epsilon == 0 any zero match count yields 0; otherwise zero
/// counts are replaced by epsilon. Brevity penalty exp(1 - r/c) when c < r.
double bleu_from_stats(const BleuStats& stats, double epsilon = 0.0);

/// Pooled-count BLEU-4 over the whole corpus, no smoothing, 0..100.
/// Throws Error{invalid_argument} on length mismatch and
/// Error{empty_input} on an empty corpus.
double corpus_bleu(std::span<const std::string> candidates, std::span<const std::string> references);

/// Sentence BLEU with add-epsilon smoothing, reported on the 0..1 scale in
/// all three fields of the PairScore.
PairScore sentence_bleu(const std::string& candidate, const std::string& reference);

}  // namespace quandary
