// Acceptance suite: one PASS/FAIL line per primary criterion. Exits non-zero
// when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "quandary/analysis/annotation.hpp"
#include "quandary/analysis/blinding.hpp"
#include "quandary/analysis/report.hpp"
#include "quandary/analysis/stats.hpp"
#include "quandary/metrics/bertscore.hpp"
#include "quandary/metrics/bleu.hpp"
#include "quandary/metrics/rouge.hpp"
#include "quandary/retrieval/index.hpp"
#include "quandary/retrieval/normalize.hpp"
#include "quandary/scoring/scorer.hpp"
#include "quandary/service/server.hpp"
#include "support.hpp"

using namespace quandary;
using quandary::testing::fixture;
using quandary::testing::TempDir;
using quandary::testing::TokenGen;

namespace {

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            notes.push_back("failed: " + what);
        }
    }
    void info(const std::string& what) { notes.push_back(what); }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool bit_equal(double a, double b) { return std::llround(a * 1e9) == std::llround(b * 1e9); }

std::string pct(double v) { return fmt::format("{:.4f}", v); }

Verdict metric_oracle_equivalence()
{
    Verdict o;
    const auto start = Clock::now();
    TokenGen gen(1000, 8);
    std::size_t mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto c = gen.tokens(20);
        const auto r = gen.tokens(20);
        const auto r1 = rouge_n_tokens(c, r, 1);
        const auto r2 = rouge_n_tokens(c, r, 2);
        const auto rl = rouge_l_tokens(c, r);
        const auto o1 = oracle::rouge_n(c, r, 1);
        const auto o2 = oracle::rouge_n(c, r, 2);
        const auto ol = oracle::rouge_l_table(c, r);
        auto same = [](const PairScore& got, const oracle::Prf& want) {
            return bit_equal(got.precision, want.precision) && bit_equal(got.recall, want.recall) &&
                   bit_equal(got.f1, want.f1);
        };
        if (!same(r1, o1) || !same(r2, o2) || !same(rl, ol)) {
            ++mismatches;
        }
    }
    const double elapsed = seconds_since(start);
    o.check(mismatches == 0, fmt::format("{} of 1000 pairs disagree with the oracle", mismatches));
    o.check(elapsed < 10.0, fmt::format("runtime {:.2f}s exceeds 10s", elapsed));
    o.info(fmt::format("1000 pairs, {:.3f}s", elapsed));
    return o;
}

Verdict bleu_worked_example()
{
    Verdict o;
    std::vector<std::string> cands;
    std::vector<std::string> refs;
    for (const auto& j : read_jsonl(fixture("bleu_pairs.jsonl"))) {
        cands.push_back(j.at("candidate").get<std::string>());
        refs.push_back(j.at("reference").get<std::string>());
    }
    // Pooled clipped matches 12/15, 8/13, 5/11, 3/9; c = 15 > r = 14, so BP = 1.
    const double hand = 100.0 * std::pow(12.0 / 15 * 8.0 / 13 * 5.0 / 11 * 3.0 / 9, 0.25);
    const double got = corpus_bleu(cands, refs);
    o.check(std::abs(got - hand) <= 1e-6, fmt::format("corpus BLEU {} != hand value {}", got, hand));
    o.info(fmt::format("corpus BLEU {:.6f}, hand {:.6f}", got, hand));
    return o;
}

Verdict bertscore_checks()
{
    Verdict o;
    OneHotProvider one_hot;
    const auto same = bertscore("keep the promise you made", "keep the promise you made", one_hot);
    const auto disjoint = bertscore("tell the truth", "never steal money", one_hot);
    o.check(std::abs(same.f1 - 1.0) <= 1e-12, fmt::format("identity F1 {}", same.f1));
    o.check(std::abs(disjoint.f1) <= 1e-12, fmt::format("disjoint F1 {}", disjoint.f1));

    auto table = TableProvider::load(fixture("bertscore_table.json"));
    const std::vector<double> honest{1.0, 0.0, 0.0};
    const std::vector<double> truthful{0.6, 0.8, 0.0};
    const std::vector<double> kind{0.0, 0.6, 0.8};
    auto cosine = [](const std::vector<double>& a, const std::vector<double>& b) {
        double d = 0;
        double na = 0;
        double nb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            d += a[i] * b[i];
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        return d / std::sqrt(na * nb);
    };
    const double precision = (cosine(honest, truthful) + cosine(kind, truthful)) / 2;
    const double recall = std::max(cosine(truthful, honest), cosine(truthful, kind));
    const double f1 = 2 * precision * recall / (precision + recall);
    const auto got = bertscore("honest kind", "truthful", table);
    o.check(std::abs(got.f1 - f1) <= 1e-9, fmt::format("table F1 {} != hand value {}", got.f1, f1));
    o.info(fmt::format("identity {:.3f}, disjoint {:.3f}, table F1 {:.12f}", same.f1, disjoint.f1, got.f1));
    return o;
}

struct AnnotationFixture {
    std::vector<AnnotationRecord> records = load_annotations(fixture("annotations130.jsonl"));
    BlindingMap blinding = load_blinding(fixture("blinding130.jsonl"));
};

Verdict success_rates()
{
    Verdict o;
    const AnnotationFixture f;
    const auto summary = summarize(f.records, "pipeline", f.blinding);
    const std::map<Criterion, double> published{
        {Criterion::multi_perspective, 62.31}, {Criterion::coherence, 43.07}, {Criterion::justification, 64.61}};
    std::string line;
    for (const auto& c : summary.criteria) {
        const double want = published.at(c.criterion);
        o.check(std::abs(c.success_rate_system - want) <= 0.01,
                fmt::format("{} {} vs {}", to_string(c.criterion), c.success_rate_system, want));
        line += fmt::format("{}{} {}", line.empty() ? "" : ", ", to_string(c.criterion), pct(c.success_rate_system));
    }
    o.info(line);
    return o;
}

Verdict stratification()
{
    Verdict o;
    const AnnotationFixture f;
    const auto scores =
        Json::parse(read_file(fixture("scores130.json"))).at("bertscore").get<std::map<std::string, double>>();
    const auto report = stratified_report("bertscore", scores, f.records, "pipeline", f.blinding);
    const StratumRow* row = nullptr;
    for (const auto& r : report.rows) {
        if (r.criterion == Criterion::multi_perspective) {
            row = &r;
        }
    }
    o.check(row != nullptr, "no multi-perspective row");
    if (row == nullptr) {
        return o;
    }
    o.check(std::abs(row->low.percent() - 51.35) <= 0.01, fmt::format("low stratum {}", row->low.percent()));
    o.check(std::abs(row->high.percent() - 69.77) <= 0.01, fmt::format("high stratum {}", row->high.percent()));

    const auto k1 = row->low.successes;
    const auto n1 = row->low.total;
    const auto k2 = row->high.successes;
    const auto n2 = row->high.total;
    const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
    const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
    const double pool = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
    const double z = (p1 - p2) / std::sqrt(pool * (1 - pool) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
    const double textbook = 2 * (1 - oracle::normal_cdf(std::abs(z)));
    const auto two_sided = two_proportion_test(k1, n1, k2, n2);
    const auto less = two_proportion_test(k1, n1, k2, n2, Alternative::less);
    o.check(std::abs(two_sided.p_value - textbook) <= 1e-6,
            fmt::format("p {} differs from textbook {}", two_sided.p_value, textbook));
    o.check(two_sided.p_value < 0.05, fmt::format("two-sided p = {:.4f} for ({},{},{},{}) is not < 0.05",
                                                  two_sided.p_value, k1, n1, k2, n2));
    o.info(fmt::format("low {} high {} z {:.4f} two-sided p {:.4f} one-sided (less) p {:.4f}", pct(row->low.percent()),
                       pct(row->high.percent()), two_sided.z, two_sided.p_value, less.p_value));
    return o;
}

Verdict conditional()
{
    Verdict o;
    const AnnotationFixture f;
    const double rate =
        conditional_rate(f.records, Criterion::coherence, Criterion::justification, "pipeline", f.blinding);
    o.check(std::abs(rate - 91.07) <= 0.01, fmt::format("conditional rate {}", rate));
    o.info("justification given coherence " + pct(rate));
    return o;
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) {
            out.push_back(line);
        }
    }
    return out;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

int run_cli(const std::vector<std::string>& args)
{
    std::string cmd = quote(QUANDARY_CLI) + " --data-dir " + quote(QUANDARY_DATA_DIR);
    for (const auto& a : args) {
        cmd += " " + quote(a);
    }
    cmd += " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Verdict pipeline_determinism()
{
    Verdict o;
    const auto start = Clock::now();
    const auto corpus = fixture("pipeline_corpus.jsonl").string();
    std::vector<std::pair<std::string, std::string>> runs;
    for (int run = 0; run < 2; ++run) {
        TempDir dir("acceptance-run");
        const auto sel = (dir / "selections.jsonl").string();
        const auto ans = (dir / "answers.jsonl").string();
        o.check(run_cli({"candidates", "--input", corpus, "--output", sel, "--seed", "7"}) == 0, "candidates failed");
        o.check(run_cli({"generate", "--input", corpus, "--selections", sel, "--output", ans, "--seed", "7"}) == 0,
                "generate failed");
        if (!o.pass) {
            return o;
        }
        runs.emplace_back(read_file(sel), read_file(ans));
    }
    const double elapsed = seconds_since(start);
    o.check(runs[0] == runs[1], "outputs differ between runs");
    o.check(runs[0].first == read_file(fixture("golden/pipeline_selections.jsonl")), "selections differ from golden");
    o.check(runs[0].second == read_file(fixture("golden/pipeline_answers.jsonl")), "answers differ from golden");

    std::size_t answers = 0;
    for (const auto& line : lines_of(runs[0].second)) {
        const auto a = Json::parse(line);
        const auto& principles = a.at("selection").at("principles");
        const auto& segments = a.at("segments");
        ++answers;
        o.check(principles.size() == 3 && segments.size() == 3,
                fmt::format("{}: {} principles, {} segments", a.at("quandary_id").get<std::string>(),
                            principles.size(), segments.size()));
        for (std::size_t i = 0; i < std::min(principles.size(), segments.size()); ++i) {
            const auto text = principles[i].at("text").get<std::string>();
            o.check(segments[i].at("text").get<std::string>().find(text) != std::string::npos,
                    "segment does not contain '" + text + "'");
        }
    }
    o.check(answers == 6, fmt::format("{} answers instead of 6", answers));
    o.check(elapsed < 30.0, fmt::format("runtime {:.2f}s exceeds 30s", elapsed));
    o.info(fmt::format("{} answers, two runs in {:.3f}s", answers, elapsed));
    return o;
}

Verdict retrieval_correctness()
{
    Verdict o;
    std::vector<Principle> docs;
    for (const auto& j : read_jsonl(fixture("principles100.jsonl"))) {
        docs.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>(), Provenance::retrieved});
    }
    const auto index = InvertedIndex::build(docs);
    std::vector<std::string> vocabulary;
    for (const auto& d : docs) {
        for (const auto& t : normalize(d.text)) {
            if (std::find(vocabulary.begin(), vocabulary.end(), t) == vocabulary.end()) {
                vocabulary.push_back(t);
            }
        }
    }
    vocabulary.push_back("zebra");
    vocabulary.push_back("quantum");
    DeterministicRng rng(50);
    std::size_t disagreements = 0;
    for (int q = 0; q < 50; ++q) {
        std::string query;
        const auto len = 1 + rng.below(8);
        for (std::uint64_t i = 0; i < len; ++i) {
            query += (query.empty() ? "" : " ") + vocabulary[rng.below(vocabulary.size())];
        }
        const auto got = retrieve_top_k(index, query, 10);
        const auto want = oracle::bm25_exhaustive(docs, query);
        if (got.size() != 10) {
            ++disagreements;
            continue;
        }
        for (std::size_t i = 0; i < got.size(); ++i) {
            const bool same_id = got[i].principle.id == want[i].id;
            const bool same_score = std::abs(got[i].score - want[i].score) <= 1e-9;
            if (!same_score || (!same_id && !(i + 1 < want.size() && std::abs(want[i].score - want[i + 1].score) <= 1e-9) &&
                                !(i > 0 && std::abs(want[i].score - want[i - 1].score) <= 1e-9))) {
                ++disagreements;
                break;
            }
        }
    }
    o.check(disagreements == 0, fmt::format("{} of 50 queries disagree with exhaustive BM25", disagreements));

    auto lexical = make_scorer(lexical_scorer_config());
    std::size_t violations = 0;
    std::size_t pools = 0;
    for (const auto& j : read_jsonl(fixture("pipeline_corpus.jsonl"))) {
        if (!j.contains("context")) {
            continue;
        }
        Quandary q{j.at("id").get<std::string>(), j.at("context").get<std::vector<std::string>>(),
                   j.at("question").get<std::string>(), "fixture"};
        std::vector<ScoredPrinciple> scored;
        for (const auto& d : docs) {
            scored.push_back(lexical->score(q, d));
        }
        ++pools;
        std::set<std::string> previous;
        for (int g = 0; g < 20; ++g) {
            ScorerConfig at = lexical_scorer_config(static_cast<double>(g) / 19.0 * 0.5);
            std::set<std::string> kept;
            for (const auto& s : filter_by_threshold(scored, at)) {
                kept.insert(s.principle.id);
            }
            if (g > 0 && !std::includes(previous.begin(), previous.end(), kept.begin(), kept.end())) {
                ++violations;
            }
            previous = kept;
        }
    }
    o.check(violations == 0, fmt::format("{} threshold steps grew the surviving set", violations));
    o.info(fmt::format("50 queries top-10, {} pools over a 20-point grid", pools));
    return o;
}

void collect_strings(const Json& j, std::vector<std::string>& out)
{
    if (j.is_string()) {
        out.push_back(j.get<std::string>());
    } else if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            out.push_back(k);
            collect_strings(v, out);
        }
    } else if (j.is_array()) {
        for (const auto& v : j) {
            collect_strings(v, out);
        }
    }
}

ApiResponse call(Service& s, const std::string& method, const std::string& path, const Json& body = nullptr)
{
    ApiRequest r;
    r.method = method;
    r.path = path;
    r.body = body.is_null() ? "" : body.dump();
    return s.handle(r);
}

Verdict blinding_uniformity()
{
    Verdict o;
    std::size_t a_first = 0;
    for (int i = 0; i < 10000; ++i) {
        a_first += blinding_bit(fmt::format("pair-{:05d}", i), 0) ? 1 : 0;
    }
    const double fraction = static_cast<double>(a_first) / 10000.0;
    o.check(fraction >= 0.49 && fraction <= 0.51, fmt::format("A-assignment fraction {}", fraction));

    TempDir dir("acceptance-service");
    ServiceConfig config;
    config.state_dir = dir.path() / "state";
    config.resources.data_dir = QUANDARY_DATA_DIR;
    config.system_id = "pipeline";
    config.reference_id = "expert";
    config.blinding_seed = 5;
    Service service(config);
    Json items = Json::array();
    for (const auto& j : read_jsonl(fixture("pipeline_corpus.jsonl"))) {
        o.check(call(service, "POST", "/quandaries", j).status == 201, "quandary rejected");
        items.push_back({{"quandary_id", j["id"]},
                         {"system_text", "Generated text for " + j["id"].get<std::string>()},
                         {"reference_text", j["answer"]["text"]}});
    }
    const auto session = call(service, "POST", "/sessions", {{"annotator", "ann-1"}, {"items", items}});
    o.check(session.status == 201, "session not created");
    if (session.status != 201) {
        return o;
    }
    std::vector<std::string> strings;
    collect_strings(session.body, strings);
    const std::string id = session.body.at("session_id").get<std::string>();
    std::size_t pairs = 0;
    for (;;) {
        const auto next = call(service, "GET", "/sessions/" + id + "/next");
        collect_strings(next.body, strings);
        if (next.status != 200 || next.body.value("done", true)) {
            break;
        }
        ++pairs;
        const auto vote = call(service, "POST", "/sessions/" + id + "/votes",
                               {{"pair_id", next.body["pair_id"]},
                                {"votes", {{"multi_perspective", "A"}, {"coherence", "B"}, {"justification", "None"}}}});
        collect_strings(vote.body, strings);
    }
    std::size_t leaks = 0;
    for (const auto& s : strings) {
        for (const char* needle : {"pipeline", "expert", "label_", "system", "seed"}) {
            if (s.find(needle) != std::string::npos) {
                ++leaks;
            }
        }
    }
    o.check(pairs == 6, fmt::format("{} pairs served instead of 6", pairs));
    o.check(leaks == 0, fmt::format("{} payload strings name a system", leaks));
    o.info(fmt::format("A fraction {:.4f}; scanned {} payload strings over {} pairs", fraction, strings.size(), pairs));
    return o;
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"metric-oracle-equivalence", metric_oracle_equivalence},
        {"bleu-worked-example", bleu_worked_example},
        {"bertscore-one-hot-and-table", bertscore_checks},
        {"success-rates", success_rates},
        {"stratification", stratification},
        {"conditional-rate", conditional},
        {"pipeline-determinism", pipeline_determinism},
        {"retrieval-correctness", retrieval_correctness},
        {"blinding-uniformity", blinding_uniformity},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Verdict outcome;
        try {
            outcome = run();
        } catch (const std::exception& e) {
            outcome.check(false, std::string("exception: ") + e.what());
        }
        std::cout << (outcome.pass ? "PASS " : "FAIL ") << name << "\n";
        for (const auto& note : outcome.notes) {
            std::cout << "     " << note << "\n";
        }
        failures += outcome.pass ? 0 : 1;
    }
    std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
                             criteria.size());
    return failures == 0 ? 0 : 1;
}
