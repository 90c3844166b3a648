#include "quandary/service/config.hpp"

namespace quandary {

ServiceConfig parse_service_config(const Json& j)
{
    ServiceConfig c;
    try {
        c.host = j.value("host", c.host);
        c.port = j.value("port", c.port);
        c.state_dir = j.value("state_dir", c.state_dir.string());
        if (j.contains("resources")) {
            c.resources = parse_resource_paths(j["resources"]);
        }
        if (j.contains("scorer")) {
            c.scorer = parse_scorer_config(j["scorer"]);
        }
        if (j.contains("backends")) {
            c.backends.clear();
            for (const auto& [name, b] : j["backends"].items()) {
                c.backends[name] = parse_backend_config(b);
            }
        }
        c.principle_backend = j.value("principle_backend", c.principle_backend);
        if (j.contains("candidates")) {
            const auto& k = j["candidates"];
            c.candidates.top_k = k.value("top_k", c.candidates.top_k);
            c.candidates.generated_count = k.value("generated_count", c.candidates.generated_count);
            c.candidates.seed = k.value("seed", c.candidates.seed);
            c.candidates.selection.jaccard_cutoff = k.value("jaccard_cutoff", c.candidates.selection.jaccard_cutoff);
        }
        if (j.contains("generation")) {
            const auto& g = j["generation"];
            c.generation.max_tokens = g.value("max_tokens", c.generation.max_tokens);
            c.generation.temperature = g.value("temperature", c.generation.temperature);
            c.generation.seed = g.value("seed", c.generation.seed);
        }
        c.pending_ttl = std::chrono::seconds(j.value("pending_ttl_s", static_cast<long long>(c.pending_ttl.count())));
        c.blinding_seed = j.value("blinding_seed", c.blinding_seed);
        c.system_id = j.value("system_id", c.system_id);
        c.reference_id = j.value("reference_id", c.reference_id);
        c.bearer_token_env = j.value("bearer_token_env", c.bearer_token_env);
        if (j.contains("static_dir") && j["static_dir"].is_string()) {
            c.static_dir = j["static_dir"].get<std::string>();
        }
        c.compact_every = j.value("compact_every", c.compact_every);
    } catch (const Json::exception& e) {
        fail(ErrorCode::schema, std::string("service config: ") + e.what());
    }
    require(c.port > 0 && c.port < 65536, ErrorCode::schema, "service config: port out of range");
    require(c.system_id != c.reference_id, ErrorCode::schema, "service config: system and reference ids must differ");
    require(c.principle_backend.empty() || c.backends.contains(c.principle_backend), ErrorCode::schema,
            "service config: principle_backend '" + c.principle_backend + "' is not a configured backend");
    c.scorer.validate();
    return c;
}

ServiceConfig load_service_config(const std::filesystem::path& path)
{
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        fail(ErrorCode::parse, path.string() + ": " + e.what());
    }
    return parse_service_config(j);
}

Json to_json(const ServiceConfig& c)
{
    Json backends = Json::object();
    for (const auto& [name, b] : c.backends) {
        backends[name] = to_json(b);
    }
    Json j{{"host", c.host},
           {"port", c.port},
           {"state_dir", c.state_dir.string()},
           {"resources", to_json(c.resources)},
           {"scorer", to_json(c.scorer)},
           {"backends", backends},
           {"principle_backend", c.principle_backend},
           {"candidates", to_json(c.candidates)},
           {"generation",
            {{"max_tokens", c.generation.max_tokens},
             {"temperature", c.generation.temperature},
             {"seed", c.generation.seed}}},
           {"pending_ttl_s", c.pending_ttl.count()},
           {"blinding_seed", c.blinding_seed},
           {"system_id", c.system_id},
           {"reference_id", c.reference_id},
           {"bearer_token_env", c.bearer_token_env},
           {"compact_every", c.compact_every}};
    if (c.static_dir) {
        j["static_dir"] = c.static_dir->string();
    }
    return j;
}

}  // namespace quandary
