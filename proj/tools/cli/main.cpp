#include <chrono>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "quandary/analysis/report.hpp"
#include "quandary/common/hash.hpp"
#include "quandary/common/log.hpp"
#include "quandary/corpus/stats.hpp"
#include "quandary/metrics/report.hpp"
#include "quandary/service/server.hpp"

using namespace quandary;

namespace {

struct Options {
    std::string config_path;
    std::string data_dir;
    std::string input;
    std::string output;
    std::uint64_t seed = 0;
    std::string backend = "mock";
    std::string backend_url;
    std::string scorer = "lexical";
    std::string scorer_endpoint;
    std::optional<double> threshold;
    std::size_t top_k = 10;
    bool top_k_set = false;
    std::string log_level = "warning";

    // Subcommand-specific.
    std::string selections;
    std::string pools;
    std::string references;
    std::string table;
    std::string embeddings;
    std::string embed_url;
    std::string blinding;
    std::string scores;
    std::string system = "system";
    std::string alternative = "two_sided";
    std::string state_dir;
    std::string blinding_output;
    std::string host;
    int port = 0;
    std::size_t generated_count = 3;
    std::size_t test_size = 0;
    std::size_t validation_size = 0;
    double grid_from = 0.0;
    double grid_to = 1.0;
    std::size_t grid_steps = 20;
    std::string mode = "automatic";
};

std::string utc_now()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

LogLevel parse_log_level(const std::string& s)
{
    if (s == "debug") {
        return LogLevel::debug;
    }
    if (s == "info") {
        return LogLevel::info;
    }
    if (s == "error") {
        return LogLevel::error;
    }
    return LogLevel::warning;
}

/// Merges the config file with command-line flags; flags win.
ServiceConfig effective_config(const Options& o)
{
    ServiceConfig c = o.config_path.empty() ? ServiceConfig{} : load_service_config(o.config_path);
    if (!o.data_dir.empty()) {
        c.resources.data_dir = o.data_dir;
    }
    if (o.scorer == "remote") {
        std::string endpoint = o.scorer_endpoint;
        if (endpoint.empty() && c.scorer.endpoint) {
            endpoint = *c.scorer.endpoint;
        }
        require(!endpoint.empty(), ErrorCode::invalid_argument, "--scorer remote needs --scorer-endpoint");
        auto remote = remote_scorer_config(endpoint);
        if (c.scorer.kind == ScorerKind::remote_relevance) {
            remote = c.scorer;
            remote.endpoint = endpoint;
        }
        c.scorer = remote;
    } else if (o.scorer == "lexical") {
        if (c.scorer.kind != ScorerKind::lexical) {
            c.scorer = lexical_scorer_config();
        }
    } else {
        fail(ErrorCode::invalid_argument, "--scorer must be lexical or remote");
    }
    if (o.threshold) {
        c.scorer.threshold = *o.threshold;
    }
    c.scorer.validate();
    if (o.top_k_set) {
        c.candidates.top_k = o.top_k;
    }
    c.candidates.generated_count = o.generated_count;
    c.candidates.seed = o.seed;
    c.generation.seed = o.seed;
    if (!o.backend_url.empty()) {
        BackendConfig http;
        http.kind = BackendKind::http;
        http.http.base_url = o.backend_url;
        c.backends["http"] = http;
    }
    require(o.backend == "mock" || o.backend == "http", ErrorCode::invalid_argument, "--backend must be mock or http");
    if (o.backend == "mock") {
        c.backends.try_emplace("mock", BackendConfig{});
    }
    require(c.backends.contains(o.backend), ErrorCode::invalid_argument,
            "backend '" + o.backend + "' is not configured; pass --backend-url");
    c.principle_backend = o.backend;
    return c;
}

void write_manifest(const std::string& command, const Options& o, const ServiceConfig& config, const Json& extra,
                    const std::string& started)
{
    require(!o.output.empty(), ErrorCode::invalid_argument, "--output is required");
    Json args{{"input", o.input},
              {"output", o.output},
              {"seed", o.seed},
              {"backend", o.backend},
              {"scorer", o.scorer},
              {"top_k", config.candidates.top_k}};
    if (o.threshold) {
        args["threshold"] = *o.threshold;
    }
    const std::string fingerprint = command + args.dump() + started;
    Json manifest{{"run_id", "run-" + to_hex(hash_with_seed(fingerprint, o.seed), 12)},
                  {"command", command},
                  {"arguments", args},
                  {"config", to_json(config)},
                  {"seed", o.seed},
                  {"input", o.input},
                  {"output", o.output},
                  {"started_at", started},
                  {"finished_at", utc_now()},
                  {"details", extra}};
    write_file_atomic(o.output + ".manifest.json", manifest.dump(2) + "\n");
}

std::vector<Quandary> load_quandaries(const std::string& path)
{
    auto result = ingest(path);
    for (const auto& r : result.report.rejections) {
        log(LogLevel::warning, path + ":" + std::to_string(r.line) + ": " + r.reason);
    }
    return result.corpus.quandaries.all();
}

int cmd_ingest(const Options& o)
{
    const auto started = utc_now();
    auto result = ingest(o.input);
    export_corpus(o.output, result.corpus);
    const Json report = to_json(result.report);
    std::cout << report.dump(2) << "\n";
    write_manifest("ingest", o, effective_config(o), report, started);
    return 0;
}

int cmd_index(const Options& o)
{
    const auto started = utc_now();
    auto index = InvertedIndex::build(load_principles(o.input));
    index.save(o.output);
    write_manifest("index", o, effective_config(o),
                   Json{{"documents", index.doc_count()}, {"terms", index.term_count()}}, started);
    return 0;
}

int cmd_candidates(const Options& o)
{
    const auto started = utc_now();
    const ServiceConfig config = effective_config(o);
    const auto resources = PipelineResources::load(config.resources);
    auto scorer = make_scorer(config.scorer);
    auto client = make_client(config.backends.at(o.backend));

    std::vector<Json> selections;
    std::vector<Json> pools;
    Json skipped = Json::array();
    for (const auto& q : load_quandaries(o.input)) {
        const RankedPool pool = candidate_pool(q, resources, *scorer, client.get(), config.candidates);
        pools.push_back(candidates_payload(q.id, pool));
        try {
            selections.push_back(to_json(automatic_selection(q, pool)));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::no_candidates) {
                throw;
            }
            log(LogLevel::warning, e.what());
            skipped.push_back({{"quandary_id", q.id}, {"reason", e.what()}});
        }
    }
    write_jsonl_atomic(o.output, selections);
    if (!o.pools.empty()) {
        write_jsonl_atomic(o.pools, pools);
    }
    write_manifest("candidates", o, config,
                   Json{{"selections", selections.size()}, {"skipped", skipped}, {"pools", o.pools}}, started);
    return 0;
}

int cmd_generate(const Options& o)
{
    const auto started = utc_now();
    require(!o.selections.empty(), ErrorCode::invalid_argument, "--selections is required");
    const ServiceConfig config = effective_config(o);
    const auto resources = PipelineResources::load(config.resources);
    auto client = make_client(config.backends.at(o.backend));

    std::map<std::string, Quandary> by_id;
    for (auto& q : load_quandaries(o.input)) {
        by_id.emplace(q.id, std::move(q));
    }
    std::vector<Json> out;
    std::size_t incomplete = 0;
    for (const auto& j : read_jsonl(o.selections)) {
        const auto selection = parse_selection(j);
        auto it = by_id.find(selection.quandary_id);
        require(it != by_id.end(), ErrorCode::not_found, "selection for unknown quandary '" + selection.quandary_id + "'");
        try {
            out.push_back(to_json(generate_answer(it->second, selection, *client, resources.templates,
                                                  resources.exemplars, config.generation)));
        } catch (const GenerationError& e) {
            log(LogLevel::error, e.what());
            out.push_back(to_json(e.partial()));
            ++incomplete;
        }
    }
    write_jsonl_atomic(o.output, out);
    write_manifest("generate", o, config, Json{{"answers", out.size()}, {"incomplete", incomplete}}, started);
    require(incomplete == 0, ErrorCode::backend, std::to_string(incomplete) + " answers are incomplete");
    return 0;
}

/// quandary id → text, from answer records, generated answers, or corpus
/// lines with an embedded answer.
std::vector<std::pair<std::string, std::string>> load_texts(const std::string& path)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& j : read_jsonl(path)) {
        if (j.contains("concatenated")) {
            out.emplace_back(j.at("quandary_id").get<std::string>(), j["concatenated"].get<std::string>());
        } else if (j.contains("quandary_id") && j.contains("text")) {
            out.emplace_back(j["quandary_id"].get<std::string>(), j["text"].get<std::string>());
        } else if (j.contains("context") && j.contains("answer")) {
            out.emplace_back(j.at("id").get<std::string>(), j["answer"].at("text").get<std::string>());
        }
    }
    return out;
}

int cmd_evaluate(const Options& o)
{
    const auto started = utc_now();
    require(!o.references.empty(), ErrorCode::invalid_argument, "--references is required");
    std::map<std::string, std::string> refs;
    for (auto& [id, text] : load_texts(o.references)) {
        refs.emplace(id, std::move(text));
    }
    std::vector<EvalPair> pairs;
    for (auto& [id, text] : load_texts(o.input)) {
        auto it = refs.find(id);
        require(it != refs.end(), ErrorCode::not_found, "no reference answer for '" + id + "'");
        pairs.push_back({id, std::move(text), it->second});
    }
    std::unique_ptr<EmbeddingProvider> provider;
    if (!o.embed_url.empty()) {
        HttpEmbeddingConfig config;
        config.base_url = o.embed_url;
        provider = std::make_unique<HttpEmbeddingProvider>(config);
    } else if (!o.embeddings.empty()) {
        provider = std::make_unique<TableProvider>(TableProvider::load(o.embeddings));
    } else {
        provider = std::make_unique<OneHotProvider>();
    }
    const auto report = evaluate_pairs(pairs, provider.get());
    write_file_atomic(o.output, to_json(report).dump(2) + "\n");
    const auto table = format_table(report);
    if (!o.table.empty()) {
        write_file_atomic(o.table, table);
    }
    std::cout << table;
    write_manifest("evaluate", o, effective_config(o), Json{{"pairs", pairs.size()}, {"references", o.references}},
                   started);
    return 0;
}

int cmd_analyze(const Options& o)
{
    const auto started = utc_now();
    require(!o.blinding.empty(), ErrorCode::invalid_argument, "--blinding is required");
    const auto records = load_annotations(o.input);
    const auto blinding = load_blinding(o.blinding);
    const auto summary = summarize(records, o.system, blinding);

    Alternative alternative = Alternative::two_sided;
    if (o.alternative == "less") {
        alternative = Alternative::less;
    } else if (o.alternative == "greater") {
        alternative = Alternative::greater;
    } else {
        require(o.alternative == "two_sided", ErrorCode::invalid_argument, "--alternative: two_sided, less, greater");
    }

    Json out{{"summary", to_json(summary)}};
    std::string text = format_summary_table(summary);
    if (!o.scores.empty()) {
        const Json scores = Json::parse(read_file(o.scores));
        std::vector<StratifiedReport> reports;
        Json strat = Json::array();
        for (const auto& [metric, values] : scores.items()) {
            reports.push_back(stratified_report(metric, values.get<std::map<std::string, double>>(), records, o.system,
                                                blinding, 0.5, alternative));
            strat.push_back(to_json(reports.back()));
        }
        out["stratified"] = strat;
        text += "\n" + format_stratified_table(reports);
    }
    Json conditional = Json::object();
    try {
        conditional["justification_given_coherence"] =
            conditional_rate(records, Criterion::coherence, Criterion::justification, o.system, blinding);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::empty_input) {
            throw;
        }
    }
    out["conditional"] = conditional;
    write_file_atomic(o.output, out.dump(2) + "\n");
    if (!o.table.empty()) {
        write_file_atomic(o.table, text);
    }
    std::cout << text;
    write_manifest("analyze", o, effective_config(o), Json{{"records", records.size()}, {"blinding", o.blinding}},
                   started);
    return 0;
}

int cmd_sweep(const Options& o)
{
    const auto started = utc_now();
    require(o.grid_steps >= 1, ErrorCode::invalid_argument, "--steps must be at least 1");
    const ServiceConfig config = effective_config(o);
    const auto resources = PipelineResources::load(config.resources);
    auto scorer = make_scorer(config.scorer);
    auto client = make_client(config.backends.at(o.backend));

    const auto quandaries = load_quandaries(o.input);
    std::vector<std::string> ids;
    std::map<std::string, const Quandary*> by_id;
    for (const auto& q : quandaries) {
        ids.push_back(q.id);
        by_id[q.id] = &q;
    }
    std::vector<std::string> sweep_ids = ids;
    if (o.validation_size > 0) {
        sweep_ids = make_splits(ids, o.seed, o.test_size, o.validation_size).validation.quandary_ids;
    }
    require(!sweep_ids.empty(), ErrorCode::empty_input, "nothing to sweep");

    std::vector<std::vector<ScoredPrinciple>> scored;
    for (const auto& id : sweep_ids) {
        CandidateOptions options = config.candidates;
        const RankedPool pool = candidate_pool(*by_id.at(id), resources, *scorer, client.get(), options);
        scored.push_back(pool.considered);
    }

    Json rows = Json::array();
    std::string table = "threshold  mean_survivors  coverage\n";
    for (std::size_t i = 0; i <= o.grid_steps; ++i) {
        ScorerConfig at = config.scorer;
        at.threshold = o.grid_from + (o.grid_to - o.grid_from) * static_cast<double>(i) /
                                         static_cast<double>(o.grid_steps);
        std::size_t survivors = 0;
        std::size_t covered = 0;
        for (const auto& s : scored) {
            const auto kept = dedup(filter_by_threshold(s, at), config.candidates.selection.jaccard_cutoff);
            survivors += kept.size();
            covered += kept.empty() ? 0 : 1;
        }
        const double n = static_cast<double>(scored.size());
        const double mean = static_cast<double>(survivors) / n;
        const double coverage = static_cast<double>(covered) / n;
        rows.push_back({{"threshold", at.threshold}, {"mean_survivors", mean}, {"coverage", coverage}});
        std::ostringstream line;
        line << std::fixed << std::setprecision(4) << std::setw(9) << at.threshold << "  " << std::setw(14) << mean
             << "  " << std::setw(8) << coverage << "\n";
        table += line.str();
    }
    write_file_atomic(o.output, Json{{"scorer", to_json(config.scorer)}, {"quandaries", sweep_ids}, {"grid", rows}}.dump(2) + "\n");
    std::cout << table;
    write_manifest("sweep-threshold", o, config, Json{{"quandaries", sweep_ids.size()}}, started);
    return 0;
}

int cmd_serve(const Options& o)
{
    ServiceConfig config = o.config_path.empty() ? ServiceConfig{} : load_service_config(o.config_path);
    if (!o.data_dir.empty()) {
        config.resources.data_dir = o.data_dir;
    }
    if (!o.state_dir.empty()) {
        config.state_dir = o.state_dir;
    }
    if (!o.host.empty()) {
        config.host = o.host;
    }
    if (o.port > 0) {
        config.port = o.port;
    }
    Service service(config);
    HttpServer server(service);
    const int port = server.bind(config.host, config.port);
    std::cerr << "listening on " << config.host << ":" << port << "\n";
    server.serve();
    return 0;
}

int cmd_export(const Options& o)
{
    const auto started = utc_now();
    require(!o.state_dir.empty(), ErrorCode::invalid_argument, "--state-dir is required");
    std::vector<Json> records;
    for (const auto& j : Journal(std::filesystem::path(o.state_dir) / "annotations.jsonl").replay()) {
        records.push_back(to_json(parse_annotation(j.at("record"))));
    }
    write_jsonl_atomic(o.output, records);
    if (!o.blinding_output.empty()) {
        std::vector<Json> pairs;
        for (const auto& j : Journal(std::filesystem::path(o.state_dir) / "blinding.jsonl").replay()) {
            pairs.push_back(to_json(parse_blinded_pair(j)));
        }
        write_jsonl_atomic(o.blinding_output, pairs);
    }
    write_manifest("export-annotations", o, effective_config(o), Json{{"records", records.size()}}, started);
    return 0;
}

void print_error(ErrorCode code, const std::string& message)
{
    std::cerr << Json{{"error", {{"code", to_string(code)}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Ethical quandary answering pipeline"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config_path, "JSON configuration file; flags override it");
    app.add_option("--data-dir", o.data_dir, "Directory holding templates, exemplars and principle files");
    app.add_option("--log-level", o.log_level, "debug, info, warning or error");

    auto common = [&](CLI::App* sub, bool needs_input = true) {
        auto* in = sub->add_option("--input", o.input, "Input file");
        if (needs_input) {
            in->required();
        }
        sub->add_option("--output", o.output, "Output file")->required();
        sub->add_option("--seed", o.seed, "Seed for every random choice");
    };
    auto pipeline_flags = [&](CLI::App* sub) {
        sub->add_option("--backend", o.backend, "Completion backend: mock or http");
        sub->add_option("--backend-url", o.backend_url, "Base URL of the http completion backend");
        sub->add_option("--scorer", o.scorer, "Relevance scorer: lexical or remote");
        sub->add_option("--scorer-endpoint", o.scorer_endpoint, "Base URL of the remote relevance scorer");
        sub->add_option("--threshold", o.threshold, "Relevance threshold in the scorer's own units");
        sub->add_option_function<std::size_t>(
            "--top-k", [&](std::size_t k) { o.top_k = k; o.top_k_set = true; }, "Retrieved principles (default 10)");
        sub->add_option("--generated", o.generated_count, "Generated principles per quandary");
    };

    auto* ingest_cmd = app.add_subcommand("ingest", "Validate a corpus and write it back in canonical form");
    common(ingest_cmd);
    auto* index_cmd = app.add_subcommand("index", "Build the BM25 index over a principle file");
    common(index_cmd);
    auto* cand_cmd = app.add_subcommand("candidates", "Rank principle pools and select principles automatically");
    common(cand_cmd);
    pipeline_flags(cand_cmd);
    cand_cmd->add_option("--pools", o.pools, "Also write the ranked pool per quandary here");
    auto* gen_cmd = app.add_subcommand("generate", "Generate answers from selections");
    common(gen_cmd);
    pipeline_flags(gen_cmd);
    gen_cmd->add_option("--selections", o.selections, "Selections written by `candidates`")->required();
    auto* eval_cmd = app.add_subcommand("evaluate", "Score answers against reference answers");
    common(eval_cmd);
    eval_cmd->add_option("--references", o.references, "Reference answers (JSONL)")->required();
    eval_cmd->add_option("--table", o.table, "Write the text table here");
    eval_cmd->add_option("--embeddings", o.embeddings, "Token embedding table (JSON) for BERTScore");
    eval_cmd->add_option("--embed-url", o.embed_url, "Embedding service base URL for BERTScore");
    auto* an_cmd = app.add_subcommand("analyze", "Success rates and stratified analysis of annotations");
    common(an_cmd);
    an_cmd->add_option("--blinding", o.blinding, "Blinding map (JSONL)")->required();
    an_cmd->add_option("--system", o.system, "System id whose success is measured");
    an_cmd->add_option("--scores", o.scores, "JSON {metric: {quandary_id: score}} for stratification");
    an_cmd->add_option("--alternative", o.alternative, "two_sided, less or greater");
    an_cmd->add_option("--table", o.table, "Write the text tables here");
    auto* sweep_cmd = app.add_subcommand("sweep-threshold", "Pool size and coverage over a threshold grid");
    common(sweep_cmd);
    pipeline_flags(sweep_cmd);
    sweep_cmd->add_option("--from", o.grid_from, "First threshold");
    sweep_cmd->add_option("--to", o.grid_to, "Last threshold");
    sweep_cmd->add_option("--steps", o.grid_steps, "Grid intervals");
    sweep_cmd->add_option("--test-size", o.test_size, "Held-out test ids before the validation split");
    sweep_cmd->add_option("--validation-size", o.validation_size, "Sweep only a validation split of this size");
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    serve_cmd->add_option("--host", o.host, "Listen address");
    serve_cmd->add_option("--port", o.port, "Listen port");
    serve_cmd->add_option("--state-dir", o.state_dir, "Journal directory");
    auto* export_cmd = app.add_subcommand("export-annotations", "Export annotation and blinding journals");
    common(export_cmd, false);
    export_cmd->add_option("--state-dir", o.state_dir, "Service journal directory")->required();
    export_cmd->add_option("--blinding-output", o.blinding_output, "Also write the blinding map here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        print_error(ErrorCode::invalid_argument, e.what());
        return 2;
    }

    set_log_threshold(parse_log_level(o.log_level));
    try {
        if (ingest_cmd->parsed()) {
            return cmd_ingest(o);
        }
        if (index_cmd->parsed()) {
            return cmd_index(o);
        }
        if (cand_cmd->parsed()) {
            return cmd_candidates(o);
        }
        if (gen_cmd->parsed()) {
            return cmd_generate(o);
        }
        if (eval_cmd->parsed()) {
            return cmd_evaluate(o);
        }
        if (an_cmd->parsed()) {
            return cmd_analyze(o);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(o);
        }
        if (serve_cmd->parsed()) {
            return cmd_serve(o);
        }
        if (export_cmd->parsed()) {
            return cmd_export(o);
        }
    } catch (const Error& e) {
        print_error(e.code(), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error(ErrorCode::io, e.what());
        return 1;
    }
    return 1;
}
