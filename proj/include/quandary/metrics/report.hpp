#pragma once

#include <span>
#include <string>
#include <vector>

#include "quandary/corpus/types.hpp"
#include "quandary/generator/generator.hpp"
#include "quandary/metrics/bertscore.hpp"
#include "quandary/metrics/bleu.hpp"

namespace quandary {

/// One candidate/reference text pair to score.
struct EvalPair {
    std::string quandary_id;
    std::string candidate;
    std::string reference;
};

/// Corpus means on the 0..100 scale.
struct MetricMean {
    MetricKind metric = MetricKind::rouge1;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MetricReport {
    std::vector<PairScore> pairs;
    std::vector<MetricMean> means;
    double corpus_bleu = 0.0;
    std::size_t pair_count = 0;
    std::string embedding_provider;

    [[nodiscard]] const MetricMean& mean(MetricKind metric) const;
};

Json to_json(const MetricReport& r);

/// Pairs without a provider skip BERTScore.
MetricReport evaluate_pairs(const std::vector<EvalPair>& pairs, EmbeddingProvider* provider);

/// Candidate text is the concatenated answer without the disclaimer.
/// Throws Error{not_found} when an answer has no reference.
MetricReport evaluate_corpus(std::span<const GeneratedAnswer> answers, std::span<const ReferenceAnswer> references,
                             EmbeddingProvider* provider);

/// Precision / Recall / F1 rows for ROUGE-1, ROUGE-2, ROUGE-L and BERTScore,
/// then a SacreBLEU row carrying the corpus value only.
std::string format_table(const MetricReport& r);

}  // namespace quandary
