#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "fake_transport.hpp"
#include "oracles.hpp"
#include "quandary/common/error.hpp"
#include "quandary/scoring/pool.hpp"
#include "quandary/scoring/selection.hpp"
#include "support.hpp"

using namespace quandary;
using quandary::testing::FakeTransport;
using quandary::testing::fixture;
using quandary::testing::make_principle;
using quandary::testing::make_quandary;
using quandary::testing::no_wait_retry;
using quandary::testing::TokenGen;

namespace {

std::vector<std::string> ids_of(const std::vector<ScoredPrinciple>& v)
{
    std::vector<std::string> out;
    for (const auto& s : v) {
        out.push_back(s.principle.id);
    }
    return out;
}

std::vector<ScoredPrinciple> random_scored(TokenGen& gen, std::size_t n, const std::string& scorer_id,
                                           Polarity polarity)
{
    std::vector<ScoredPrinciple> out;
    for (std::size_t i = 0; i < n; ++i) {
        auto text = gen.text(5);
        out.push_back({make_principle("p" + std::to_string(i), text.empty() ? gen.word() : text),
                       static_cast<double>(gen.rng().below(100)) / 50.0, scorer_id, polarity});
    }
    return out;
}

const Quandary kQuandary = make_quandary("q", {"My friend lied to me about money."}, "Should I forgive my friend?");

ScorerConfig remote_config(int retries = 0)
{
    auto c = remote_scorer_config("http://scorer.test");
    c.retry = no_wait_retry(retries);
    return c;
}

}  // namespace

TEST(Lexical, MatchesCosineOracle)
{
    TokenGen gen(5, 10);
    for (int i = 0; i < 200; ++i) {
        const auto q = make_quandary("q", {gen.text(8)}, gen.text(4));
        const auto p = make_principle("p", gen.text(6));
        const auto s = score_lexical(q, p);
        EXPECT_NEAR(s.score, oracle::tf_cosine(q.full_text(), p.text), 1e-12);
        EXPECT_GE(s.score, 0.0);
        EXPECT_LE(s.score, 1.0);
        EXPECT_EQ(s.polarity, Polarity::higher_better);
    }
}

TEST(Config, Validation)
{
    EXPECT_NO_THROW(lexical_scorer_config().validate());
    auto c = remote_scorer_config("");
    EXPECT_THROW(c.validate(), Error);
    auto bad = lexical_scorer_config(std::numeric_limits<double>::infinity());
    EXPECT_THROW(bad.validate(), Error);
    const auto r = remote_scorer_config("http://x");
    EXPECT_EQ(r.polarity, Polarity::lower_better);
    EXPECT_DOUBLE_EQ(r.threshold, 1.02);
    const auto back = parse_scorer_config(to_json(r));
    EXPECT_EQ(back.endpoint, r.endpoint);
    EXPECT_EQ(back.polarity, r.polarity);
    EXPECT_DOUBLE_EQ(back.threshold, r.threshold);
}

TEST(Remote, RequestShapeAndResponse)
{
    FakeTransport t;
    t.push(200, R"({"perplexity": 1.01})");
    const auto s = score_remote(remote_config(), kQuandary, make_principle("p", "Be honest."), t);
    EXPECT_DOUBLE_EQ(s.score, 1.01);
    EXPECT_EQ(s.polarity, Polarity::lower_better);
    const auto body = Json::parse(t.requests.at(0).body);
    EXPECT_EQ(body["context"], kQuandary.full_text());
    EXPECT_EQ(body["principle"], "Be honest.");
    EXPECT_EQ(body["template"], kRelevanceTemplate);
    EXPECT_EQ(t.requests[0].path, "/v1/relevance");
}

TEST(Remote, NonConformingResponsesAreScorerErrors)
{
    for (const char* body : {R"({})", R"({"perplexity":"low"})", R"({"perplexity":-1})", "not json"}) {
        FakeTransport t;
        t.push(200, body);
        try {
            (void)score_remote(remote_config(), kQuandary, make_principle("p", "x"), t);
            FAIL() << body;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::scorer) << body;
        }
    }
}

TEST(Remote, RetriesTransientFailures)
{
    FakeTransport t;
    t.push(503, "");
    t.push(200, R"({"perplexity": 2})");
    const auto s = score_remote(remote_config(2), kQuandary, make_principle("p", "x"), t);
    EXPECT_DOUBLE_EQ(s.score, 2.0);
    EXPECT_EQ(t.requests.size(), 2U);
}

TEST(ScorePool, FailuresAreDroppedNotFatal)
{
    auto t = std::make_shared<FakeTransport>();
    t->push(200, R"({"perplexity": 1.0})");
    t->push(400, "bad");
    t->push(200, R"({"perplexity": 1.5})");
    RemoteRelevanceScorer scorer(remote_config(), t);
    std::vector<Principle> pool{make_principle("a", "one"), make_principle("b", "two"), make_principle("c", "three")};
    const auto out = score_pool(scorer, kQuandary, pool);
    EXPECT_EQ(ids_of(out.scored), (std::vector<std::string>{"a", "c"}));
    ASSERT_EQ(out.dropped.size(), 1U);
    EXPECT_EQ(out.dropped[0].principle.id, "b");
}

TEST(Threshold, InclusiveBoundary)
{
    const auto hi = lexical_scorer_config(0.5);
    std::vector<ScoredPrinciple> v{{make_principle("a", "a"), 0.5, "lexical", Polarity::higher_better},
                                   {make_principle("b", "b"), 0.49, "lexical", Polarity::higher_better}};
    EXPECT_EQ(ids_of(filter_by_threshold(v, hi)), (std::vector<std::string>{"a"}));
    auto lo = remote_scorer_config("http://x", 1.02);
    std::vector<ScoredPrinciple> w{{make_principle("a", "a"), 1.02, "relevance", Polarity::lower_better},
                                   {make_principle("b", "b"), 1.03, "relevance", Polarity::lower_better}};
    EXPECT_EQ(ids_of(filter_by_threshold(w, lo)), (std::vector<std::string>{"a"}));
    EXPECT_THROW((void)filter_by_threshold(v, lo), Error);
}

TEST(Threshold, MonotoneInThresholdProperty)
{
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        TokenGen gen(seed);
        for (auto polarity : {Polarity::higher_better, Polarity::lower_better}) {
            ScorerConfig c = polarity == Polarity::higher_better ? lexical_scorer_config()
                                                                 : remote_scorer_config("http://x");
            const auto v = random_scored(gen, 25, c.scorer_id, polarity);
            std::size_t prev = polarity == Polarity::higher_better ? v.size() + 1 : 0;
            std::set<std::string> prev_ids;
            for (int step = 0; step <= 20; ++step) {
                c.threshold = step * 0.1;
                const auto ids = ids_of(filter_by_threshold(v, c));
                const std::set<std::string> cur(ids.begin(), ids.end());
                if (polarity == Polarity::higher_better) {
                    EXPECT_LE(cur.size(), prev);
                    if (step > 0) {
                        EXPECT_TRUE(std::includes(prev_ids.begin(), prev_ids.end(), cur.begin(), cur.end()));
                    }
                } else {
                    EXPECT_GE(cur.size(), prev);
                    EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev_ids.begin(), prev_ids.end()));
                }
                prev = cur.size();
                prev_ids = cur;
            }
        }
    }
}

TEST(Dedup, KeepsBetterScoredMember)
{
    std::vector<ScoredPrinciple> v{
        {make_principle("a", "It is wrong to lie to friends."), 0.3, "lexical", Polarity::higher_better},
        {make_principle("b", "it is WRONG to lie to   friends."), 0.9, "lexical", Polarity::higher_better},
        {make_principle("c", "Be kind."), 0.1, "lexical", Polarity::higher_better}};
    EXPECT_EQ(ids_of(dedup(v)), (std::vector<std::string>{"b", "c"}));
    EXPECT_DOUBLE_EQ(token_jaccard("a b c d", "a b c e"), 3.0 / 5.0);
}

TEST(Dedup, IdempotentAndPairwiseDistinctProperty)
{
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        TokenGen gen(seed, 5);
        const auto v = random_scored(gen, 20, "lexical", Polarity::higher_better);
        const auto once = dedup(v);
        EXPECT_EQ(ids_of(dedup(once)), ids_of(once));
        for (std::size_t i = 0; i < once.size(); ++i) {
            for (std::size_t j = i + 1; j < once.size(); ++j) {
                EXPECT_FALSE(near_duplicate(once[i].principle, once[j].principle));
            }
        }
        for (const auto& s : v) {
            const bool covered = std::any_of(once.begin(), once.end(), [&](const ScoredPrinciple& k) {
                return near_duplicate(s.principle, k.principle);
            });
            EXPECT_TRUE(covered);
        }
    }
}

TEST(Ensemble, RankSum)
{
    auto mk = [](const char* id, double s, const char* scorer, Polarity p) {
        return ScoredPrinciple{make_principle(id, id), s, scorer, p};
    };
    const auto fused = rank_sum_ensemble(
        {{mk("a", 0.9, "lex", Polarity::higher_better), mk("b", 0.5, "lex", Polarity::higher_better),
          mk("c", 0.1, "lex", Polarity::higher_better)},
         {mk("c", 1.0, "rel", Polarity::lower_better), mk("a", 1.5, "rel", Polarity::lower_better)}});
    std::map<std::string, double> by;
    for (const auto& f : fused) {
        by[f.principle.id] = f.score;
        EXPECT_EQ(f.scorer_id, "rank_sum");
    }
    EXPECT_DOUBLE_EQ(by["a"], 1 + 2);
    EXPECT_DOUBLE_EQ(by["b"], 2 + 3);
    EXPECT_DOUBLE_EQ(by["c"], 3 + 1);
    EXPECT_EQ(fused.front().principle.id, "a");
}

TEST(Pool, OrderAndProvenance)
{
    const auto index = InvertedIndex::build(load_principles(fixture("principles100.jsonl")));
    CompletionClient client(std::make_shared<MockBackend>());
    PoolSources src;
    src.index = &index;
    src.top_k = 5;
    src.generator = &client;
    src.generated_count = 3;
    src.seed = 9;
    src.handcrafted = {make_principle("hc-1", "Act as you would want others to act.", Provenance::human)};
    const auto pool = build_pool(kQuandary, src);
    ASSERT_GE(pool.size(), 7U);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(pool[i].provenance, Provenance::retrieved);
    }
    EXPECT_EQ(pool.back().provenance, Provenance::handcrafted);
    std::set<std::string> ids;
    for (const auto& p : pool) {
        EXPECT_TRUE(ids.insert(p.id).second);
    }
    EXPECT_EQ(build_pool(kQuandary, src), pool);
}

TEST(Selection, AutomaticTakesTopThree)
{
    const auto docs = load_principles(fixture("principles100.jsonl"));
    LexicalScorer scorer;
    const auto q = make_quandary("q", {"I borrowed money from my friend."}, "Should I return money I borrow?");
    const auto result = select_principles(q, docs, scorer, SelectionMode::automatic);
    const auto& sel = std::get<PrincipleSelection>(result);
    ASSERT_EQ(sel.principles.size(), 3U);
    const auto ranked = rank_pool(q, docs, scorer).ranked;
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(sel.principles[i].id, ranked[i].principle.id);
    }
    EXPECT_EQ(parse_selection(to_json(sel)).principles, sel.principles);
}

TEST(Selection, NoSurvivorsIsNoCandidates)
{
    LexicalScorer scorer;
    std::vector<Principle> pool{make_principle("a", "zzz yyy")};
    try {
        (void)select_principles(kQuandary, pool, scorer, SelectionMode::automatic);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::no_candidates);
    }
    const auto pending = select_principles(kQuandary, pool, scorer, SelectionMode::human);
    EXPECT_TRUE(std::get<PendingSelection>(pending).pool().ranked.empty());
}

TEST(Selection, HumanConfirmRules)
{
    const auto docs = load_principles(fixture("principles100.jsonl"));
    LexicalScorer scorer;
    const auto now = PendingSelection::Clock::now();
    auto make = [&] {
        return std::get<PendingSelection>(select_principles(kQuandary, docs, scorer, SelectionMode::human, {},
                                                            std::chrono::seconds(60), now));
    };
    const auto pending = make();
    const auto first = pending.pool().ranked.at(0).principle.id;
    auto code_of = [&](const std::vector<PrincipleChoice>& choices, PendingSelection::Clock::time_point when) {
        try {
            (void)confirm_selection(make(), choices, "ann", when);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::io;
    };
    EXPECT_EQ(code_of({}, now), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of({{"x1", {}}, {"x2", {}}, {"x3", {}}, {"x4", {}}}, now), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of({{"nope", {}}}, now), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of({{first, {}}, {first, {}}}, now), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of({{"", "Be kind to all."}, {"", "be kind to ALL."}}, now), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of({{first, {}}}, now + std::chrono::seconds(61)), ErrorCode::expired);

    const auto sel = confirm_selection(pending, {{first, {}}, {"", "Listen before judging."}}, "ann-7", now);
    EXPECT_EQ(sel.mode, SelectionMode::human);
    EXPECT_EQ(sel.selected_by, "ann-7");
    EXPECT_EQ(sel.principles[1].provenance, Provenance::human);
    EXPECT_EQ(pending.finalized()->principles, sel.principles);
    try {
        (void)confirm_selection(pending, {{first, {}}}, "ann-8", now);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::conflict);
    }
}

TEST(Selection, ConcurrentConfirmOnlyOneWins)
{
    const auto docs = load_principles(fixture("principles100.jsonl"));
    LexicalScorer scorer;
    const auto pending =
        std::get<PendingSelection>(select_principles(kQuandary, docs, scorer, SelectionMode::human));
    const auto first = pending.pool().ranked.at(0).principle.id;
    std::atomic<int> wins{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&, i] {
            try {
                (void)confirm_selection(pending, {{first, {}}}, "ann-" + std::to_string(i));
                ++wins;
            } catch (const Error&) {
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    EXPECT_EQ(wins.load(), 1);
}

TEST(Selection, PendingTokenIsDeterministic)
{
    const auto c = lexical_scorer_config();
    EXPECT_EQ(make_pending_token("q", c, 10), make_pending_token("q", c, 10));
    EXPECT_NE(make_pending_token("q", c, 10), make_pending_token("q", c, 11));
    EXPECT_NE(make_pending_token("q", c, 10), make_pending_token("r", c, 10));
}
