#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "quandary/llm/client.hpp"
#include "quandary/scoring/scorer.hpp"
#include "quandary/service/pipeline.hpp"

namespace quandary {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    /// Journals live here.
    std::filesystem::path state_dir = "state";
    ResourcePaths resources;

    ScorerConfig scorer = lexical_scorer_config();
    /// Named completion backends; requests pick one by name.
    std::map<std::string, BackendConfig> backends{{"mock", BackendConfig{}}};
    /// Backend used for the generated principle source; empty disables it.
    std::string principle_backend = "mock";
    CandidateOptions candidates;
    GenerationOptions generation;

    std::chrono::seconds pending_ttl{kPendingTtl};
    std::uint64_t blinding_seed = 0;
    std::string system_id = "system";
    std::string reference_id = "reference";

    /// When this variable is set and non-empty, every API call must carry
    /// "Authorization: Bearer <value>".
    std::string bearer_token_env = "QUANDARY_SERVICE_TOKEN";
    std::optional<std::filesystem::path> static_dir;
    /// Journal records appended between compactions.
    std::size_t compact_every = 1000;
};

/// Unknown keys are ignored; missing keys keep their defaults.
ServiceConfig parse_service_config(const Json& j);
ServiceConfig load_service_config(const std::filesystem::path& path);
Json to_json(const ServiceConfig& c);

}  // namespace quandary
