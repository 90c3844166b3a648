#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "quandary/common/error.hpp"
#include "quandary/corpus/stats.hpp"
#include "quandary/corpus/store.hpp"
#include "support.hpp"

using namespace quandary;
using quandary::testing::fixture;
using quandary::testing::TempDir;

namespace {

MeanStd oracle_mean_std(const std::vector<double>& v)
{
    double sum = 0;
    for (double x : v) {
        sum += x;
    }
    const double mean = sum / static_cast<double>(v.size());
    double sq = 0;
    for (double x : v) {
        sq += (x - mean) * (x - mean);
    }
    return {mean, std::sqrt(sq / static_cast<double>(v.size()))};
}

}  // namespace

TEST(Types, QuandaryRoundTrip)
{
    Quandary q{"q-1", {"First  paragraph.", "Second."}, "Why?", "src"};
    EXPECT_EQ(parse_quandary(to_json(q)), q);
    EXPECT_EQ(q.full_text(), "First  paragraph. Second. Why?");
}

TEST(Types, ParseRejectsMissingFields)
{
    for (const char* bad : {R"({"context":["a"],"question":"b"})", R"({"id":"x","context":[],"question":"b"})",
                            R"({"id":"x","context":["a"]})", R"({"id":"x","context":"a","question":"b"})"}) {
        try {
            (void)parse_quandary(Json::parse(bad));
            FAIL() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::schema) << bad;
        }
    }
}

TEST(Types, ProvenanceNames)
{
    for (auto p : {Provenance::retrieved, Provenance::generated, Provenance::handcrafted, Provenance::human}) {
        EXPECT_EQ(provenance_from_string(to_string(p)), p);
    }
    EXPECT_THROW((void)provenance_from_string("oracle"), Error);
}

TEST(Types, NormalizeWhitespace)
{
    EXPECT_EQ(normalize_whitespace("  a \t b\n\nc  "), "a b c");
    EXPECT_EQ(normalize_whitespace("   "), "");
}

TEST(Ingest, ThreeLineFixture)
{
    auto result = ingest(fixture("quandaries3.jsonl"));
    EXPECT_EQ(result.report.accepted_quandaries, 3U);
    EXPECT_EQ(result.report.accepted_answers, 3U);
    EXPECT_TRUE(result.report.rejections.empty());
    EXPECT_EQ(result.corpus.answers.find("q-002")->author, "expert");
}

TEST(Ingest, SkipsBadLinesAndReportsThem)
{
    TempDir dir("ingest");
    std::ofstream(dir / "in.jsonl") << R"({"id":"a","context":["c"],"question":"q"})" << "\n"
                                    << "not json\n"
                                    << R"({"id":"a","context":["c2"],"question":"q2"})" << "\n"
                                    << R"({"quandary_id":"zzz","text":"t","author":"x"})" << "\n"
                                    << R"({"quandary_id":"a","text":"t","author":"x"})" << "\n";
    auto result = ingest(dir / "in.jsonl");
    EXPECT_EQ(result.report.accepted_quandaries, 1U);
    EXPECT_EQ(result.report.accepted_answers, 1U);
    ASSERT_EQ(result.report.rejections.size(), 3U);
    EXPECT_EQ(result.report.rejections[0].line, 2U);
    EXPECT_EQ(result.report.rejections[1].line, 3U);
    EXPECT_EQ(result.report.rejections[2].line, 4U);
}

TEST(Ingest, ExportReingestRoundTrip)
{
    TempDir dir("export");
    auto first = ingest(fixture("pipeline_corpus.jsonl"));
    export_corpus(dir / "out.jsonl", first.corpus);
    auto second = ingest(dir / "out.jsonl");
    EXPECT_EQ(second.corpus.quandaries.all(), first.corpus.quandaries.all());
    EXPECT_EQ(second.corpus.answers.all(), first.corpus.answers.all());
}

TEST(Store, DuplicateInsertLeavesStoreUnchanged)
{
    QuandaryStore store;
    EXPECT_TRUE(store.insert({"a", {"x"}, "y", ""}));
    EXPECT_FALSE(store.insert({"a", {"other"}, "z", ""}));
    EXPECT_EQ(store.size(), 1U);
    EXPECT_EQ(store.find("a")->question, "y");
}

TEST(Store, JournalReplay)
{
    TempDir dir("store");
    {
        PrincipleStore store(dir / "p.jsonl");
        store.insert({"p1", "It is good to help.", Provenance::human});
    }
    PrincipleStore reopened(dir / "p.jsonl");
    ASSERT_TRUE(reopened.contains("p1"));
    EXPECT_EQ(reopened.find("p1")->provenance, Provenance::human);
}

TEST(Stats, WordsAndSentences)
{
    EXPECT_EQ(count_words("  a  b\tc\n"), 3U);
    EXPECT_EQ(count_words(""), 0U);
    EXPECT_EQ(split_sentences("One. Two! Three? Four").size(), 4U);
    EXPECT_EQ(split_sentences("e.g. this").size(), 2U);
    EXPECT_EQ(split_sentences("Dr. Who").size(), 2U);
    EXPECT_TRUE(split_sentences("   ").empty());
}

TEST(Stats, HandCountedFixture)
{
    auto result = ingest(fixture("stats4.jsonl"));
    DatasetSplit split{SplitName::test, {"s-1", "s-2", "s-3", "s-4"}};
    const auto s = compute_stats(split, result.corpus);
    EXPECT_EQ(s.sample_count, 4U);
    const auto qw = oracle_mean_std({5, 5, 10, 7});
    const auto qs = oracle_mean_std({2, 3, 2, 2});
    const auto aw = oracle_mean_std({4, 1, 6, 1});
    const auto as = oracle_mean_std({1, 1, 3, 1});
    EXPECT_NEAR(s.words_per_quandary.mean, qw.mean, 1e-12);
    EXPECT_NEAR(s.words_per_quandary.std, qw.std, 1e-12);
    EXPECT_NEAR(s.sentences_per_quandary.mean, qs.mean, 1e-12);
    EXPECT_NEAR(s.sentences_per_quandary.std, qs.std, 1e-12);
    EXPECT_NEAR(s.words_per_answer.mean, aw.mean, 1e-12);
    EXPECT_NEAR(s.words_per_answer.std, aw.std, 1e-12);
    EXPECT_NEAR(s.sentences_per_answer.mean, as.mean, 1e-12);
    EXPECT_NEAR(s.sentences_per_answer.std, as.std, 1e-12);
}

TEST(Stats, MissingAnswerIsNotFound)
{
    Corpus corpus;
    corpus.quandaries.insert({"a", {"x"}, "y", ""});
    try {
        (void)compute_stats({SplitName::test, {"a"}}, corpus);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::not_found);
    }
}

TEST(Splits, PartitionProperty)
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        DeterministicRng rng(seed);
        const auto n = static_cast<std::size_t>(rng.below(40) + 1);
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) {
            ids.push_back("id" + std::to_string(i));
        }
        const auto test_size = static_cast<std::size_t>(rng.below(n + 1));
        const auto val_size = static_cast<std::size_t>(rng.below(n - test_size + 1));
        const auto splits = make_splits(ids, seed, test_size, val_size);
        EXPECT_EQ(splits.test.quandary_ids.size(), test_size);
        EXPECT_EQ(splits.validation.quandary_ids.size(), val_size);
        std::multiset<std::string> all;
        for (const auto* s : {&splits.train, &splits.validation, &splits.test}) {
            all.insert(s->quandary_ids.begin(), s->quandary_ids.end());
        }
        EXPECT_EQ(all, std::multiset<std::string>(ids.begin(), ids.end()));
        EXPECT_EQ(make_splits(ids, seed, test_size, val_size).test.quandary_ids, splits.test.quandary_ids);
    }
}

TEST(Splits, OversizedTestIsInvalid)
{
    std::vector<std::string> ids{"a", "b"};
    EXPECT_THROW((void)make_splits(ids, 1, 3), Error);
}
