#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "quandary/generator/generator.hpp"
#include "quandary/scoring/pool.hpp"
#include "quandary/scoring/selection.hpp"

namespace quandary {

/// Data files the pipeline reads. Empty paths fall back to defaults under
/// `data_dir`.
struct ResourcePaths {
    std::filesystem::path data_dir;
    std::filesystem::path principles;
    std::filesystem::path handcrafted;
    std::filesystem::path templates;
    std::filesystem::path exemplars;

    [[nodiscard]] ResourcePaths resolved() const;
};

Json to_json(const ResourcePaths& p);
ResourcePaths parse_resource_paths(const Json& j);

/// Everything loaded once and shared read-only between requests.
struct PipelineResources {
    InvertedIndex index;
    std::vector<Principle> handcrafted;
    TemplateSet templates;
    std::vector<FewShotExemplar> exemplars;

    /// `principles` may be a saved index file or a principle JSONL file.
    static PipelineResources load(const ResourcePaths& paths);
};

struct CandidateOptions {
    /// Retrieval depth, and the cap on the ranked list that is returned.
    std::size_t top_k = 10;
    std::size_t generated_count = 3;
    std::uint64_t seed = 0;
    SelectionOptions selection;
};

Json to_json(const CandidateOptions& o);

/// Builds the three-source pool and ranks it with `scorer`. `generator`
/// may be null, which skips the generated source.
RankedPool candidate_pool(const Quandary& quandary, const PipelineResources& resources, Scorer& scorer,
                          CompletionClient* generator, const CandidateOptions& options);

/// The best min(3, |ranked|) survivors as an automatic selection; throws
/// Error{no_candidates} when none survived.
PrincipleSelection automatic_selection(const Quandary& quandary, const RankedPool& pool,
                                       std::size_t max_principles = kMaxPrinciples);

/// Payload shared by `GET /quandaries/{id}/candidates` and the CLI.
Json candidates_payload(const std::string& quandary_id, const RankedPool& pool);

}  // namespace quandary
