#include "quandary/metrics/report.hpp"

#include <map>

#include <fmt/format.h>

namespace quandary {

const MetricMean& MetricReport::mean(MetricKind metric) const
{
    for (const auto& m : means) {
        if (m.metric == metric) {
            return m;
        }
    }
    fail(ErrorCode::not_found, "report has no mean for " + std::string(to_string(metric)));
}

Json to_json(const MetricReport& r)
{
    Json pairs = Json::array();
    for (const auto& p : r.pairs) {
        pairs.push_back(to_json(p));
    }
    Json means = Json::object();
    for (const auto& m : r.means) {
        means[std::string(to_string(m.metric))] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
    }
    return Json{{"pair_count", r.pair_count},
                {"corpus_bleu", r.corpus_bleu},
                {"embedding_provider", r.embedding_provider},
                {"means", means},
                {"pairs", pairs}};
}

MetricReport evaluate_pairs(const std::vector<EvalPair>& pairs, EmbeddingProvider* provider)
{
    require(!pairs.empty(), ErrorCode::empty_input, "nothing to evaluate");
    MetricReport report;
    report.pair_count = pairs.size();
    report.embedding_provider = provider ? provider->id() : "";

    std::vector<MetricKind> kinds{MetricKind::rouge1, MetricKind::rouge2, MetricKind::rougeL,
                                  MetricKind::bleu_sentence};
    if (provider) {
        kinds.push_back(MetricKind::bertscore);
    }
    std::map<MetricKind, MetricMean> sums;
    for (auto k : kinds) {
        sums[k].metric = k;
    }

    std::vector<std::string> candidates;
    std::vector<std::string> references;
    for (const auto& pair : pairs) {
        std::vector<PairScore> scores{rouge_n(pair.candidate, pair.reference, 1),
                                      rouge_n(pair.candidate, pair.reference, 2),
                                      rouge_l(pair.candidate, pair.reference),
                                      sentence_bleu(pair.candidate, pair.reference)};
        if (provider) {
            scores.push_back(bertscore(pair.candidate, pair.reference, *provider));
        }
        for (auto& s : scores) {
            s.quandary_id = pair.quandary_id;
            auto& m = sums[s.metric];
            m.precision += s.precision;
            m.recall += s.recall;
            m.f1 += s.f1;
            report.pairs.push_back(std::move(s));
        }
        candidates.push_back(pair.candidate);
        references.push_back(pair.reference);
    }
    const double scale = 100.0 / static_cast<double>(pairs.size());
    for (auto k : kinds) {
        auto m = sums[k];
        m.precision *= scale;
        m.recall *= scale;
        m.f1 *= scale;
        report.means.push_back(m);
    }
    report.corpus_bleu = corpus_bleu(candidates, references);
    return report;
}

MetricReport evaluate_corpus(std::span<const GeneratedAnswer> answers, std::span<const ReferenceAnswer> references,
                             EmbeddingProvider* provider)
{
    std::map<std::string, const ReferenceAnswer*> by_id;
    for (const auto& r : references) {
        by_id.emplace(r.quandary_id, &r);
    }
    std::vector<EvalPair> pairs;
    for (const auto& a : answers) {
        auto it = by_id.find(a.quandary_id);
        require(it != by_id.end(), ErrorCode::not_found, "no reference answer for '" + a.quandary_id + "'");
        pairs.push_back({a.quandary_id, a.concatenated, it->second->text});
    }
    return evaluate_pairs(pairs, provider);
}

std::string format_table(const MetricReport& r)
{
    std::string out = fmt::format("{:<10} {:>10} {:>10} {:>10}\n", "", "Precision", "Recall", "F1");
    const std::pair<MetricKind, const char*> rows[] = {{MetricKind::rouge1, "ROUGE-1"},
                                                       {MetricKind::rouge2, "ROUGE-2"},
                                                       {MetricKind::rougeL, "ROUGE-L"},
                                                       {MetricKind::bertscore, "BERTScore"}};
    for (const auto& [kind, label] : rows) {
        for (const auto& m : r.means) {
            if (m.metric == kind) {
                out += fmt::format("{:<10} {:>10.2f} {:>10.2f} {:>10.2f}\n", label, m.precision, m.recall, m.f1);
            }
        }
    }
    out += fmt::format("{:<10} {:>10.2f} {:>10} {:>10}\n", "SacreBLEU", r.corpus_bleu, "-", "-");
    return out;
}

}  // namespace quandary
