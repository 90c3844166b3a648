#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quandary/common/io.hpp"

namespace quandary {

enum class MetricKind { rouge1, rouge2, rougeL, bleu_sentence, bertscore };

std::string_view to_string(MetricKind m) noexcept;
MetricKind metric_from_string(std::string_view s);

/// Precision, recall and F1 for one candidate/reference pair, each in [0, 1].
struct PairScore {
    std::string quandary_id;
    MetricKind metric = MetricKind::rouge1;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

Json to_json(const PairScore& s);

/// Harmonic mean; 0 when p + r == 0.
double f1_score(double precision, double recall) noexcept;

/// Clipped n-gram overlap over normalize() tokens. n must be 1 or 2.
PairScore rouge_n(const std::string& candidate, const std::string& reference, int n);
PairScore rouge_n_tokens(std::span<const std::string> candidate, std::span<const std::string> reference, int n);

/// Longest-common-subsequence overlap over normalize() tokens.
PairScore rouge_l(const std::string& candidate, const std::string& reference);
PairScore rouge_l_tokens(std::span<const std::string> candidate, std::span<const std::string> reference);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

}  // namespace quandary
