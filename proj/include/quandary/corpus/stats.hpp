#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quandary/corpus/store.hpp"

namespace quandary {

/// Maximal runs of non-whitespace.
std::size_t count_words(std::string_view text);

/// Sentences end at '.', '!' or '?' followed by whitespace or end of text.
/// Abbreviations are not special-cased. Whitespace-only pieces are not counted.
std::vector<std::string> split_sentences(std::string_view text);

/// Population mean and standard deviation; empty input yields {0, 0}.
MeanStd mean_std(std::span<const double> values);

/// Length statistics over the quandary/answer pairs named by `split`.
/// Every id must resolve to a quandary and a reference answer.
CorpusStats compute_stats(const DatasetSplit& split, const Corpus& corpus);

struct SplitSet {
    DatasetSplit train{SplitName::train, {}};
    DatasetSplit validation{SplitName::validation, {}};
    DatasetSplit test{SplitName::test, {}};
};

/// Seeded shuffle, then test takes the first `test_size` ids, validation the
/// next `validation_size`, train the rest.
SplitSet make_splits(std::span<const std::string> ids, std::uint64_t seed, std::size_t test_size,
                     std::size_t validation_size = 0);

}  // namespace quandary
