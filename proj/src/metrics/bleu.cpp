#include "quandary/metrics/bleu.hpp"

#include <cmath>
#include <map>
#include <regex>
#include <sstream>

#include "quandary/common/error.hpp"

namespace quandary {

std::vector<std::string> tokenize_13a(std::string_view text)
{
    static const std::regex symbols(R"(([\{-\~\[-\` -\&\(-\+\:-\@\/]))");
    static const std::regex period_comma_after(R"(([^0-9])([\.,]))");
    static const std::regex period_comma_before(R"(([\.,])([^0-9]))");
    static const std::regex dash_after_digit(R"(([0-9])(-))");

    std::string line(text);
    auto replace_all = [&line](std::string_view from, std::string_view to) {
        for (auto pos = line.find(from); pos != std::string::npos; pos = line.find(from, pos + to.size())) {
            line.replace(pos, from.size(), to);
        }
    };
    replace_all("<skipped>", "");
    replace_all("-\n", "");
    replace_all("\n", " ");
    if (line.find('&') != std::string::npos) {
        replace_all("&quot;", "\"");
        replace_all("&amp;", "&");
        replace_all("&lt;", "<");
        replace_all("&gt;", ">");
    }
    line = " " + line + " ";
    line = std::regex_replace(line, symbols, " $1 ");
    line = std::regex_replace(line, period_comma_after, "$1 $2 ");
    line = std::regex_replace(line, period_comma_before, " $1 $2");
    line = std::regex_replace(line, dash_after_digit, "$1 $2 ");

    std::vector<std::string> tokens;
    std::istringstream in(line);
    for (std::string t; in >> t;) {
        tokens.push_back(std::move(t));
    }
    return tokens;
}

BleuStats& BleuStats::operator+=(const BleuStats& other) noexcept
{
    for (int n = 0; n < kBleuMaxOrder; ++n) {
        matches[n] += other.matches[n];
        totals[n] += other.totals[n];
    }
    candidate_length += other.candidate_length;
    reference_length += other.reference_length;
    return *this;
}

BleuStats bleu_stats(std::span<const std::string> candidate, std::span<const std::string> reference)
{
    BleuStats s;
    s.candidate_length = candidate.size();
    s.reference_length = reference.size();
    for (std::size_t n = 1; n <= kBleuMaxOrder; ++n) {
        std::map<std::vector<std::string>, std::size_t> ref_counts;
        for (std::size_t i = 0; i + n <= reference.size(); ++i) {
            ++ref_counts[{reference.begin() + static_cast<std::ptrdiff_t>(i),
                          reference.begin() + static_cast<std::ptrdiff_t>(i + n)}];
        }
        std::map<std::vector<std::string>, std::size_t> cand_counts;
        for (std::size_t i = 0; i + n <= candidate.size(); ++i) {
            ++cand_counts[{candidate.begin() + static_cast<std::ptrdiff_t>(i),
                           candidate.begin() + static_cast<std::ptrdiff_t>(i + n)}];
        }
        std::size_t matched = 0;
        std::size_t total = 0;
        for (const auto& [gram, c] : cand_counts) {
            total += c;
            if (auto it = ref_counts.find(gram); it != ref_counts.end()) {
                matched += std::min(c, it->second);
            }
        }
        s.matches[n - 1] = matched;
        s.totals[n - 1] = total;
    }
    return s;
}

double bleu_from_stats(const BleuStats& stats, double epsilon)
{
    if (stats.candidate_length == 0) {
        return 0.0;
    }
    double log_sum = 0.0;
    for (int n = 0; n < kBleuMaxOrder; ++n) {
        double m = static_cast<double>(stats.matches[n]);
        const double t = static_cast<double>(std::max<std::size_t>(stats.totals[n], 1));
        if (stats.matches[n] == 0) {
            if (epsilon <= 0.0) {
                return 0.0;
            }
            m = epsilon;
        }
        log_sum += std::log(m / t);
    }
    const double c = static_cast<double>(stats.candidate_length);
    const double r = static_cast<double>(stats.reference_length);
    const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
    return 100.0 * bp * std::exp(log_sum / kBleuMaxOrder);
}

double corpus_bleu(std::span<const std::string> candidates, std::span<const std::string> references)
{
    require(candidates.size() == references.size(), ErrorCode::invalid_argument,
            "corpus_bleu needs one reference per candidate (" + std::to_string(candidates.size()) + " vs " +
                std::to_string(references.size()) + ")");
    require(!candidates.empty(), ErrorCode::empty_input, "corpus_bleu on an empty corpus");
    BleuStats pooled;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto c = tokenize_13a(candidates[i]);
        const auto r = tokenize_13a(references[i]);
        pooled += bleu_stats(c, r);
    }
    return bleu_from_stats(pooled);
}

PairScore sentence_bleu(const std::string& candidate, const std::string& reference)
{
    const auto c = tokenize_13a(candidate);
    const auto r = tokenize_13a(reference);
    const double v = bleu_from_stats(bleu_stats(c, r), kSentenceBleuEpsilon) / 100.0;
    PairScore s;
    s.metric = MetricKind::bleu_sentence;
    s.precision = v;
    s.recall = v;
    s.f1 = v;
    return s;
}

}  // namespace quandary
