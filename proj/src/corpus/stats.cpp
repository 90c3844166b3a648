#include "quandary/corpus/stats.hpp"

#include <cctype>
#include <cmath>
#include <unordered_set>

#include "quandary/common/error.hpp"
#include "quandary/common/rng.hpp"

namespace quandary {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::size_t count_words(std::string_view text)
{
    std::size_t words = 0;
    bool in_word = false;
    for (char c : text) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    return words;
}

std::vector<std::string> split_sentences(std::string_view text)
{
    std::vector<std::string> sentences;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        std::string piece = normalize_whitespace(text.substr(start, end - start));
        if (!piece.empty()) {
            sentences.push_back(std::move(piece));
        }
        start = end;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || is_space(text[i + 1]))) {
            flush(i + 1);
        }
    }
    flush(text.size());
    return sentences;
}

MeanStd mean_std(std::span<const double> values)
{
    if (values.empty()) {
        return {};
    }
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    const double mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) {
        sq += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

CorpusStats compute_stats(const DatasetSplit& split, const Corpus& corpus)
{
    require(!split.quandary_ids.empty(), ErrorCode::empty_input,
            "cannot compute statistics over an empty split");

    std::vector<double> q_words, q_sentences, a_words, a_sentences;
    for (const auto& id : split.quandary_ids) {
        auto q = corpus.quandaries.find(id);
        require(q.has_value(), ErrorCode::not_found, "unknown quandary '" + id + "'");
        auto a = corpus.answers.find(id);
        require(a.has_value(), ErrorCode::not_found, "no reference answer for '" + id + "'");
        const std::string text = q->full_text();
        q_words.push_back(static_cast<double>(count_words(text)));
        q_sentences.push_back(static_cast<double>(split_sentences(text).size()));
        a_words.push_back(static_cast<double>(count_words(a->text)));
        a_sentences.push_back(static_cast<double>(split_sentences(a->text).size()));
    }
    CorpusStats stats;
    stats.sample_count = split.quandary_ids.size();
    stats.words_per_quandary = mean_std(q_words);
    stats.sentences_per_quandary = mean_std(q_sentences);
    stats.words_per_answer = mean_std(a_words);
    stats.sentences_per_answer = mean_std(a_sentences);
    return stats;
}

SplitSet make_splits(std::span<const std::string> ids, std::uint64_t seed, std::size_t test_size,
                     std::size_t validation_size)
{
    require(test_size <= ids.size(), ErrorCode::invalid_argument,
            "test_size " + std::to_string(test_size) + " exceeds " + std::to_string(ids.size()) + " ids");
    require(test_size + validation_size <= ids.size(), ErrorCode::invalid_argument,
            "test_size + validation_size exceeds the number of ids");
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        require(seen.insert(id).second, ErrorCode::invalid_argument, "duplicate id '" + id + "'");
    }

    std::vector<std::string> order(ids.begin(), ids.end());
    DeterministicRng rng(seed);
    rng.shuffle(std::span<std::string>(order));

    SplitSet out;
    auto first = order.begin();
    out.test.quandary_ids.assign(first, first + static_cast<std::ptrdiff_t>(test_size));
    first += static_cast<std::ptrdiff_t>(test_size);
    out.validation.quandary_ids.assign(first, first + static_cast<std::ptrdiff_t>(validation_size));
    first += static_cast<std::ptrdiff_t>(validation_size);
    out.train.quandary_ids.assign(first, order.end());
    return out;
}

}  // namespace quandary
