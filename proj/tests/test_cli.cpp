#include <sys/wait.h>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "quandary/common/io.hpp"
#include "support.hpp"

namespace quandary::testing {
namespace {

struct RunResult {
    int status = -1;
    std::string out;
    std::string err;
};

std::string quote(const std::string& s)
{
    std::string q = "'";
    for (char c : s) {
        if (c == '\'') {
            q += "'\\''";
        } else {
            q += c;
        }
    }
    return q + "'";
}

RunResult run_cli(const TempDir& dir, const std::vector<std::string>& args)
{
    std::string cmd = quote(QUANDARY_CLI) + " --data-dir " + quote(QUANDARY_DATA_DIR);
    for (const auto& a : args) {
        cmd += " " + quote(a);
    }
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    cmd += " >" + quote(out.string()) + " 2>" + quote(err.string());
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
}

Json manifest_of(const std::filesystem::path& output)
{
    return Json::parse(read_file(output.string() + ".manifest.json"));
}

Json without_timestamps(Json manifest)
{
    manifest.erase("started_at");
    manifest.erase("finished_at");
    manifest.erase("run_id");
    return manifest;
}

Json error_of(const RunResult& r)
{
    const auto line = r.err.substr(r.err.rfind("{\"error\""));
    return Json::parse(line).at("error");
}

TEST(CliIngest, WritesCanonicalCorpusAndManifest)
{
    TempDir dir("cli-ingest");
    const auto out = dir / "corpus.jsonl";
    const auto r = run_cli(dir, {"ingest", "--input", fixture("quandaries3.jsonl").string(), "--output", out.string()});
    ASSERT_EQ(r.status, 0) << r.err;
    std::size_t quandaries = 0;
    std::size_t answers = 0;
    for (const auto& j : read_jsonl(out)) {
        quandaries += j.contains("context") ? 1 : 0;
        answers += j.contains("quandary_id") ? 1 : 0;
    }
    EXPECT_EQ(quandaries, 3U);
    EXPECT_EQ(answers, 3U);
    EXPECT_EQ(Json::parse(r.out).at("accepted_quandaries"), 3);
    const auto manifest = manifest_of(out);
    EXPECT_EQ(manifest.at("command"), "ingest");
    EXPECT_EQ(manifest.at("seed"), 0);
    EXPECT_EQ(manifest.at("output"), out.string());
    EXPECT_TRUE(manifest.contains("started_at"));
    EXPECT_TRUE(manifest.contains("finished_at"));
    EXPECT_EQ(manifest.at("run_id").get<std::string>().rfind("run-", 0), 0U);
}

TEST(CliIndex, ReportsDocumentCount)
{
    TempDir dir("cli-index");
    const auto out = dir / "index.json";
    const auto r = run_cli(dir, {"index", "--input", fixture("principles100.jsonl").string(), "--output", out.string()});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(out));
    EXPECT_EQ(manifest_of(out).at("details").at("documents"), 100);
}

class CliPipeline : public ::testing::Test {
  protected:
    struct Outputs {
        std::string selections;
        std::string answers;
        Json selections_manifest;
        Json answers_manifest;
    };

    Outputs run_once()
    {
        const auto corpus = fixture("pipeline_corpus.jsonl").string();
        const auto sel = dir_ / "selections.jsonl";
        const auto ans = dir_ / "answers.jsonl";
        auto r = run_cli(dir_, {"candidates", "--input", corpus, "--output", sel.string(), "--seed", "7"});
        EXPECT_EQ(r.status, 0) << r.err;
        r = run_cli(dir_, {"generate", "--input", corpus, "--selections", sel.string(), "--output", ans.string(),
                           "--seed", "7"});
        EXPECT_EQ(r.status, 0) << r.err;
        return {read_file(sel), read_file(ans), manifest_of(sel), manifest_of(ans)};
    }

    TempDir dir_{"cli-pipeline"};
};

TEST_F(CliPipeline, RepeatedRunsAreByteIdentical)
{
    const auto first = run_once();
    const auto second = run_once();
    EXPECT_EQ(first.selections, second.selections);
    EXPECT_EQ(first.answers, second.answers);
    EXPECT_EQ(without_timestamps(first.selections_manifest), without_timestamps(second.selections_manifest));
    EXPECT_EQ(without_timestamps(first.answers_manifest), without_timestamps(second.answers_manifest));
}

TEST_F(CliPipeline, EachAnswerHasOneSegmentPerPrinciple)
{
    run_once();
    const auto answers = read_jsonl(dir_ / "answers.jsonl");
    ASSERT_EQ(answers.size(), 6U);
    for (const auto& a : answers) {
        const auto& principles = a.at("selection").at("principles");
        const auto& segments = a.at("segments");
        ASSERT_EQ(principles.size(), 3U) << a.at("quandary_id");
        ASSERT_EQ(segments.size(), 3U) << a.at("quandary_id");
        for (std::size_t i = 0; i < segments.size(); ++i) {
            EXPECT_EQ(segments[i].at("principle_id"), principles[i].at("id"));
            EXPECT_NE(segments[i].at("text").get<std::string>().find(principles[i].at("text").get<std::string>()),
                      std::string::npos);
        }
        EXPECT_TRUE(a.at("complete").get<bool>());
    }
}

TEST_F(CliPipeline, MatchesGoldenOutputs)
{
    const auto outputs = run_once();
    EXPECT_EQ(outputs.selections, read_file(fixture("golden/pipeline_selections.jsonl")));
    EXPECT_EQ(outputs.answers, read_file(fixture("golden/pipeline_answers.jsonl")));
}

TEST_F(CliPipeline, SeedChangesGeneratedText)
{
    const auto corpus = fixture("pipeline_corpus.jsonl").string();
    const auto sel = dir_ / "selections.jsonl";
    ASSERT_EQ(run_cli(dir_, {"candidates", "--input", corpus, "--output", sel.string()}).status, 0);
    const auto a = dir_ / "a.jsonl";
    const auto b = dir_ / "b.jsonl";
    ASSERT_EQ(run_cli(dir_, {"generate", "--input", corpus, "--selections", sel.string(), "--output", a.string(),
                             "--seed", "1"})
                  .status,
              0);
    ASSERT_EQ(run_cli(dir_, {"generate", "--input", corpus, "--selections", sel.string(), "--output", b.string(),
                             "--seed", "2"})
                  .status,
              0);
    EXPECT_NE(read_file(a), read_file(b));
}

TEST(CliEvaluate, CorpusBleuMatchesWorkedExample)
{
    TempDir dir("cli-eval");
    std::vector<Json> candidates;
    std::vector<Json> references;
    for (const auto& j : read_jsonl(fixture("bleu_pairs.jsonl"))) {
        candidates.push_back({{"quandary_id", j["quandary_id"]}, {"text", j["candidate"]}});
        references.push_back({{"quandary_id", j["quandary_id"]}, {"text", j["reference"]}});
    }
    write_jsonl_atomic(dir / "cand.jsonl", candidates);
    write_jsonl_atomic(dir / "ref.jsonl", references);
    const auto out = dir / "report.json";
    const auto table = dir / "table.txt";
    const auto r = run_cli(dir, {"evaluate", "--input", (dir / "cand.jsonl").string(), "--references",
                                 (dir / "ref.jsonl").string(), "--output", out.string(), "--table", table.string()});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto report = Json::parse(read_file(out));
    EXPECT_EQ(report.at("pair_count"), 2);
    EXPECT_NEAR(report.at("corpus_bleu").get<double>(), 52.26045319355428, 1e-6);
    EXPECT_EQ(read_file(table), r.out);
}

TEST(CliEvaluate, MissingReferenceIsNotFound)
{
    TempDir dir("cli-eval-missing");
    write_jsonl_atomic(dir / "cand.jsonl", {Json{{"quandary_id", "x"}, {"text", "a b"}}});
    write_jsonl_atomic(dir / "ref.jsonl", {Json{{"quandary_id", "y"}, {"text", "a b"}}});
    const auto r = run_cli(dir, {"evaluate", "--input", (dir / "cand.jsonl").string(), "--references",
                                 (dir / "ref.jsonl").string(), "--output", (dir / "o.json").string()});
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(error_of(r).at("code"), "not_found");
}

TEST(CliAnalyze, ReportsRatesStrataAndConditional)
{
    TempDir dir("cli-analyze");
    const auto out = dir / "analysis.json";
    const auto r = run_cli(dir, {"analyze", "--input", fixture("annotations130.jsonl").string(), "--blinding",
                                 fixture("blinding130.jsonl").string(), "--scores", fixture("scores130.json").string(),
                                 "--system", "pipeline", "--output", out.string()});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto doc = Json::parse(read_file(out));
    std::map<std::string, double> rates;
    for (const auto& c : doc.at("summary").at("criteria")) {
        rates[c.at("criterion").get<std::string>()] = c.at("success_rate_system").get<double>();
    }
    EXPECT_NEAR(rates.at("multi_perspective"), 100.0 * 81 / 130, 1e-9);
    EXPECT_NEAR(rates.at("coherence"), 100.0 * 56 / 130, 1e-9);
    EXPECT_NEAR(rates.at("justification"), 100.0 * 84 / 130, 1e-9);
    EXPECT_NEAR(doc.at("conditional").at("justification_given_coherence").get<double>(), 100.0 * 51 / 56, 1e-9);
    const auto& strat = doc.at("stratified").at(0);
    EXPECT_EQ(strat.at("metric"), "bertscore");
    for (const auto& row : strat.at("rows")) {
        if (row.at("criterion") == "multi_perspective") {
            EXPECT_EQ(row.at("low").at("successes"), 19);
            EXPECT_EQ(row.at("low").at("total"), 37);
            EXPECT_EQ(row.at("high").at("successes"), 30);
            EXPECT_EQ(row.at("high").at("total"), 43);
        }
    }
}

TEST(CliAnalyze, RejectsUnknownAlternative)
{
    TempDir dir("cli-analyze-alt");
    const auto r = run_cli(dir, {"analyze", "--input", fixture("annotations130.jsonl").string(), "--blinding",
                                 fixture("blinding130.jsonl").string(), "--alternative", "sideways", "--output",
                                 (dir / "a.json").string()});
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(error_of(r).at("code"), "invalid_argument");
}

TEST(CliSweep, SurvivorsFallAsThresholdRises)
{
    TempDir dir("cli-sweep");
    const auto out = dir / "sweep.json";
    const auto r = run_cli(dir, {"sweep-threshold", "--input", fixture("pipeline_corpus.jsonl").string(), "--output",
                                 out.string(), "--from", "0", "--to", "0.5", "--steps", "20"});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto doc = Json::parse(read_file(out));
    const auto& grid = doc.at("grid");
    ASSERT_EQ(grid.size(), 21U);
    EXPECT_EQ(doc.at("quandaries").size(), 6U);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        EXPECT_LT(grid[i - 1].at("threshold").get<double>(), grid[i].at("threshold").get<double>());
        EXPECT_GE(grid[i - 1].at("mean_survivors").get<double>(), grid[i].at("mean_survivors").get<double>());
        EXPECT_GE(grid[i - 1].at("coverage").get<double>(), grid[i].at("coverage").get<double>());
    }
}

TEST(CliErrors, MissingInputFileIsReportedAsJson)
{
    TempDir dir("cli-missing");
    const auto r = run_cli(dir, {"ingest", "--input", (dir / "nope.jsonl").string(), "--output",
                                 (dir / "o.jsonl").string()});
    EXPECT_EQ(r.status, 1);
    const auto error = error_of(r);
    EXPECT_TRUE(error.contains("code"));
    EXPECT_FALSE(error.at("message").get<std::string>().empty());
    EXPECT_FALSE(std::filesystem::exists(dir / "o.jsonl"));
}

TEST(CliErrors, MissingRequiredOptionExitsWithTwo)
{
    TempDir dir("cli-usage");
    const auto r = run_cli(dir, {"candidates", "--output", (dir / "o.jsonl").string()});
    EXPECT_EQ(r.status, 2);
    EXPECT_EQ(error_of(r).at("code"), "invalid_argument");
}

TEST(CliErrors, RemoteScorerWithoutEndpointIsInvalid)
{
    TempDir dir("cli-remote");
    const auto r = run_cli(dir, {"candidates", "--input", fixture("pipeline_corpus.jsonl").string(), "--output",
                                 (dir / "o.jsonl").string(), "--scorer", "remote"});
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(error_of(r).at("code"), "invalid_argument");
}

TEST(CliErrors, UnknownBackendFailsBeforeWriting)
{
    TempDir dir("cli-backend");
    const auto r = run_cli(dir, {"candidates", "--input", fixture("pipeline_corpus.jsonl").string(), "--output",
                                 (dir / "o.jsonl").string(), "--backend", "nonexistent"});
    EXPECT_NE(r.status, 0);
    EXPECT_FALSE(std::filesystem::exists(dir / "o.jsonl"));
}

}  // namespace
}  // namespace quandary::testing
