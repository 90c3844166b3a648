#include "quandary/service/pipeline.hpp"

#include <fstream>

namespace quandary {

namespace {

bool is_index_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    return first.find("\"quandary-bm25-index\"") != std::string::npos;
}

}  // namespace

ResourcePaths ResourcePaths::resolved() const
{
    ResourcePaths r = *this;
    const auto base = data_dir.empty() ? std::filesystem::path("data") : data_dir;
    if (r.principles.empty()) {
        r.principles = base / "principles" / "rots.jsonl";
    }
    if (r.handcrafted.empty()) {
        r.handcrafted = base / "principles" / "handcrafted.jsonl";
    }
    if (r.templates.empty()) {
        r.templates = base / "templates";
    }
    if (r.exemplars.empty()) {
        r.exemplars = base / "exemplars.jsonl";
    }
    return r;
}

Json to_json(const ResourcePaths& p)
{
    return Json{{"data_dir", p.data_dir.string()},
                {"principles", p.principles.string()},
                {"handcrafted", p.handcrafted.string()},
                {"templates", p.templates.string()},
                {"exemplars", p.exemplars.string()}};
}

ResourcePaths parse_resource_paths(const Json& j)
{
    ResourcePaths p;
    p.data_dir = j.value("data_dir", std::string{});
    p.principles = j.value("principles", std::string{});
    p.handcrafted = j.value("handcrafted", std::string{});
    p.templates = j.value("templates", std::string{});
    p.exemplars = j.value("exemplars", std::string{});
    return p;
}

PipelineResources PipelineResources::load(const ResourcePaths& paths)
{
    const auto r = paths.resolved();
    InvertedIndex index = is_index_file(r.principles) ? InvertedIndex::load(r.principles)
                                                      : InvertedIndex::build(load_principles(r.principles));
    std::vector<Principle> handcrafted;
    if (std::filesystem::exists(r.handcrafted)) {
        handcrafted = load_principles(r.handcrafted);
        for (auto& p : handcrafted) {
            p.provenance = Provenance::handcrafted;
        }
    }
    return {std::move(index), std::move(handcrafted), load_templates(r.templates), load_exemplars(r.exemplars)};
}

Json to_json(const CandidateOptions& o)
{
    return Json{{"top_k", o.top_k},
                {"generated_count", o.generated_count},
                {"seed", o.seed},
                {"max_principles", o.selection.max_principles},
                {"jaccard_cutoff", o.selection.jaccard_cutoff}};
}

RankedPool candidate_pool(const Quandary& quandary, const PipelineResources& resources, Scorer& scorer,
                          CompletionClient* generator, const CandidateOptions& options)
{
    require(options.top_k >= 1, ErrorCode::invalid_argument, "top_k must be at least 1");
    PoolSources sources;
    sources.index = &resources.index;
    sources.top_k = options.top_k;
    sources.generator = generator;
    sources.generated_count = generator ? options.generated_count : 0;
    sources.seed = options.seed;
    sources.handcrafted = resources.handcrafted;
    RankedPool pool = rank_pool(quandary, build_pool(quandary, sources), scorer, options.selection);
    if (pool.ranked.size() > options.top_k) {
        pool.ranked.resize(options.top_k);
    }
    return pool;
}

PrincipleSelection automatic_selection(const Quandary& quandary, const RankedPool& pool, std::size_t max_principles)
{
    if (pool.ranked.empty()) {
        fail(ErrorCode::no_candidates,
             "no principle for '" + quandary.id + "' passed threshold " + Json(pool.threshold).dump() +
                 " of scorer '" + pool.scorer_id + "'; relax the threshold or select principles manually");
    }
    PrincipleSelection s;
    s.quandary_id = quandary.id;
    s.mode = SelectionMode::automatic;
    for (std::size_t i = 0; i < std::min(max_principles, pool.ranked.size()); ++i) {
        s.principles.push_back(pool.ranked[i].principle);
    }
    s.trace = pool.considered;
    s.dropped = pool.dropped;
    s.scorer_id = pool.scorer_id;
    s.threshold = pool.threshold;
    return s;
}

Json candidates_payload(const std::string& quandary_id, const RankedPool& pool)
{
    Json j = to_json(pool);
    j["quandary_id"] = quandary_id;
    return j;
}

}  // namespace quandary
