#include "quandary/retrieval/index.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "quandary/common/error.hpp"
#include "quandary/retrieval/normalize.hpp"

namespace quandary {

namespace {

constexpr const char* kIndexFormat = "quandary-bm25-index";

}  // namespace

std::string_view to_string(Polarity p) noexcept
{
    return p == Polarity::higher_better ? "higher_better" : "lower_better";
}

Polarity polarity_from_string(std::string_view s)
{
    if (s == "higher_better") return Polarity::higher_better;
    if (s == "lower_better") return Polarity::lower_better;
    fail(ErrorCode::schema, "unknown polarity '" + std::string(s) + "'");
}

Json to_json(const ScoredPrinciple& s)
{
    return Json{{"principle", to_json(s.principle)},
                {"score", s.score},
                {"scorer_id", s.scorer_id},
                {"polarity", to_string(s.polarity)}};
}

ScoredPrinciple parse_scored_principle(const Json& j)
{
    ScoredPrinciple s;
    s.principle = parse_principle(j.at("principle"));
    s.score = j.at("score").get<double>();
    s.scorer_id = j.at("scorer_id").get<std::string>();
    s.polarity = polarity_from_string(j.at("polarity").get<std::string>());
    return s;
}

void sort_ranked(std::vector<ScoredPrinciple>& items)
{
    std::stable_sort(items.begin(), items.end(), [](const ScoredPrinciple& a, const ScoredPrinciple& b) {
        if (a.score != b.score) {
            return better(a.score, b.score, a.polarity);
        }
        return a.principle.id < b.principle.id;
    });
}

InvertedIndex InvertedIndex::build(std::vector<Principle> principles)
{
    require(!principles.empty(), ErrorCode::empty_input, "cannot index an empty principle list");

    InvertedIndex index;
    index.docs_ = std::move(principles);
    index.lengths_.reserve(index.docs_.size());
    double total = 0.0;
    for (std::size_t d = 0; d < index.docs_.size(); ++d) {
        const auto tokens = normalize(index.docs_[d].text);
        std::map<std::string, std::uint32_t> counts;
        for (const auto& t : tokens) {
            ++counts[t];
        }
        for (const auto& [term, tf] : counts) {
            index.postings_[term].push_back({static_cast<std::uint32_t>(d), tf});
        }
        index.lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        total += static_cast<double>(tokens.size());
    }
    index.avg_length_ = total / static_cast<double>(index.docs_.size());
    return index;
}

std::size_t InvertedIndex::document_frequency(const std::string& term) const
{
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

std::span<const Posting> InvertedIndex::postings(const std::string& term) const
{
    auto it = postings_.find(term);
    if (it == postings_.end()) {
        return {};
    }
    return it->second;
}

void InvertedIndex::save(const std::filesystem::path& path) const
{
    std::vector<Json> lines;
    lines.push_back({{"format", kIndexFormat},
                     {"version", kFormatVersion},
                     {"doc_count", docs_.size()},
                     {"term_count", postings_.size()},
                     {"average_length", avg_length_}});
    for (std::size_t d = 0; d < docs_.size(); ++d) {
        Json doc = to_json(docs_[d]);
        doc["length"] = lengths_[d];
        lines.push_back({{"doc", doc}});
    }
    // Sorted terms so identical collections produce identical files.
    std::vector<const std::string*> terms;
    terms.reserve(postings_.size());
    for (const auto& [term, _] : postings_) {
        terms.push_back(&term);
    }
    std::sort(terms.begin(), terms.end(), [](const auto* a, const auto* b) { return *a < *b; });
    for (const auto* term : terms) {
        Json list = Json::array();
        for (const auto& p : postings_.at(*term)) {
            list.push_back({p.doc, p.term_frequency});
        }
        lines.push_back({{"term", *term}, {"postings", list}});
    }
    write_jsonl_atomic(path, lines);
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path)
{
    const auto lines = read_jsonl(path);
    require(!lines.empty(), ErrorCode::parse, path.string() + ": empty index file");
    const Json& header = lines.front();
    require(header.value("format", "") == kIndexFormat, ErrorCode::parse,
            path.string() + ": not an index file");
    require(header.value("version", 0) == kFormatVersion, ErrorCode::parse,
            path.string() + ": unsupported index version");

    InvertedIndex index;
    const auto doc_count = header.at("doc_count").get<std::size_t>();
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const Json& line = lines[i];
        if (line.contains("doc")) {
            index.docs_.push_back(parse_principle(line["doc"]));
            index.lengths_.push_back(line["doc"].at("length").get<std::uint32_t>());
        } else {
            auto& list = index.postings_[line.at("term").get<std::string>()];
            for (const auto& p : line.at("postings")) {
                list.push_back({p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>()});
            }
        }
    }
    require(index.docs_.size() == doc_count && doc_count > 0, ErrorCode::parse,
            path.string() + ": document count does not match header");
    index.avg_length_ = header.at("average_length").get<double>();
    return index;
}

double bm25_idf(std::size_t doc_count, std::size_t document_frequency)
{
    const auto n = static_cast<double>(doc_count);
    const auto df = static_cast<double>(document_frequency);
    return std::max(0.0, std::log((n - df + 0.5) / (df + 0.5)));
}

std::vector<ScoredPrinciple> retrieve_top_k(const InvertedIndex& index, std::string_view query,
                                            std::size_t k, const Bm25Params& params)
{
    require(k >= 1, ErrorCode::invalid_argument, "k must be at least 1");
    require(index.doc_count() > 0, ErrorCode::empty_input, "index is empty");

    std::vector<double> scores(index.doc_count(), 0.0);
    std::unordered_set<std::string> seen;
    for (const auto& term : normalize(query)) {
        if (!seen.insert(term).second) {
            continue;
        }
        const auto postings = index.postings(term);
        if (postings.empty()) {
            continue;
        }
        const double idf = bm25_idf(index.doc_count(), postings.size());
        for (const auto& p : postings) {
            const double tf = p.term_frequency;
            const double norm = 1.0 - params.b + params.b * index.length(p.doc) / index.average_length();
            scores[p.doc] += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
        }
    }

    std::vector<std::uint32_t> order(index.doc_count());
    for (std::uint32_t d = 0; d < order.size(); ++d) {
        order[d] = d;
    }
    const std::size_t take = std::min(k, order.size());
    const auto& docs = index.documents();
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          if (scores[a] != scores[b]) {
                              return scores[a] > scores[b];
                          }
                          return docs[a].id < docs[b].id;
                      });

    std::vector<ScoredPrinciple> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.push_back({docs[order[i]], scores[order[i]], "bm25", Polarity::higher_better});
    }
    return out;
}

std::vector<ScoredPrinciple> retrieve_top_k(const InvertedIndex& index, const Quandary& quandary,
                                            std::size_t k, const Bm25Params& params)
{
    return retrieve_top_k(index, quandary.full_text(), k, params);
}

}  // namespace quandary
