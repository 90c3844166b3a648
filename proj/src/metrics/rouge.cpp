#include "quandary/metrics/rouge.hpp"

#include <algorithm>
#include <map>

#include "quandary/common/error.hpp"
#include "quandary/retrieval/normalize.hpp"

namespace quandary {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(std::span<const std::string> tokens, std::size_t n)
{
    NgramCounts counts;
    if (tokens.size() < n) {
        return counts;
    }
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                          tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

double ratio(std::size_t num, std::size_t den) noexcept
{
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::string_view to_string(MetricKind m) noexcept
{
    switch (m) {
    case MetricKind::rouge1:
        return "rouge1";
    case MetricKind::rouge2:
        return "rouge2";
    case MetricKind::rougeL:
        return "rougeL";
    case MetricKind::bleu_sentence:
        return "bleu_sentence";
    case MetricKind::bertscore:
        return "bertscore";
    }
    return "unknown";
}

MetricKind metric_from_string(std::string_view s)
{
    for (auto m : {MetricKind::rouge1, MetricKind::rouge2, MetricKind::rougeL, MetricKind::bleu_sentence,
                   MetricKind::bertscore}) {
        if (to_string(m) == s) {
            return m;
        }
    }
    fail(ErrorCode::schema, "unknown metric '" + std::string(s) + "'");
}

Json to_json(const PairScore& s)
{
    return Json{{"quandary_id", s.quandary_id},
                {"metric", to_string(s.metric)},
                {"precision", s.precision},
                {"recall", s.recall},
                {"f1", s.f1}};
}

double f1_score(double precision, double recall) noexcept
{
    const double sum = precision + recall;
    return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

PairScore rouge_n_tokens(std::span<const std::string> candidate, std::span<const std::string> reference, int n)
{
    require(n == 1 || n == 2, ErrorCode::invalid_argument, "rouge_n supports n = 1 or 2");
    const auto un = static_cast<std::size_t>(n);
    const auto cand = count_ngrams(candidate, un);
    const auto ref = count_ngrams(reference, un);
    std::size_t overlap = 0;
    for (const auto& [gram, c] : cand) {
        if (auto it = ref.find(gram); it != ref.end()) {
            overlap += std::min(c, it->second);
        }
    }
    const std::size_t cand_total = candidate.size() >= un ? candidate.size() - un + 1 : 0;
    const std::size_t ref_total = reference.size() >= un ? reference.size() - un + 1 : 0;
    PairScore s;
    s.metric = n == 1 ? MetricKind::rouge1 : MetricKind::rouge2;
    s.precision = ratio(overlap, cand_total);
    s.recall = ratio(overlap, ref_total);
    s.f1 = f1_score(s.precision, s.recall);
    return s;
}

PairScore rouge_n(const std::string& candidate, const std::string& reference, int n)
{
    const auto c = normalize(candidate);
    const auto r = normalize(reference);
    return rouge_n_tokens(c, r, n);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b)
{
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

PairScore rouge_l_tokens(std::span<const std::string> candidate, std::span<const std::string> reference)
{
    const auto l = lcs_length(candidate, reference);
    PairScore s;
    s.metric = MetricKind::rougeL;
    s.precision = ratio(l, candidate.size());
    s.recall = ratio(l, reference.size());
    s.f1 = f1_score(s.precision, s.recall);
    return s;
}

PairScore rouge_l(const std::string& candidate, const std::string& reference)
{
    const auto c = normalize(candidate);
    const auto r = normalize(reference);
    return rouge_l_tokens(c, r);
}

}  // namespace quandary
