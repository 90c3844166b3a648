#include "quandary/scoring/scorer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "quandary/common/log.hpp"
#include "quandary/retrieval/normalize.hpp"

namespace quandary {

void ScorerConfig::validate() const
{
    require(std::isfinite(threshold), ErrorCode::invalid_argument, "scorer threshold must be finite");
    require(!scorer_id.empty(), ErrorCode::invalid_argument, "scorer_id must be non-empty");
    if (kind == ScorerKind::remote_relevance) {
        require(endpoint.has_value() && !endpoint->empty(), ErrorCode::invalid_argument,
                "remote relevance scorer requires an endpoint");
    }
}

ScorerConfig lexical_scorer_config(double threshold)
{
    ScorerConfig c;
    c.scorer_id = "lexical";
    c.kind = ScorerKind::lexical;
    c.polarity = Polarity::higher_better;
    c.threshold = threshold;
    return c;
}

ScorerConfig remote_scorer_config(std::string endpoint, double threshold)
{
    ScorerConfig c;
    c.scorer_id = "relevance";
    c.kind = ScorerKind::remote_relevance;
    c.polarity = Polarity::lower_better;
    c.threshold = threshold;
    c.endpoint = std::move(endpoint);
    return c;
}

Json to_json(const ScorerConfig& c)
{
    Json j{{"scorer_id", c.scorer_id},
           {"kind", c.kind == ScorerKind::lexical ? "lexical" : "remote_relevance"},
           {"polarity", to_string(c.polarity)},
           {"threshold", c.threshold},
           {"path", c.path},
           {"timeout_ms", c.timeout.count()},
           {"max_retries", c.retry.max_retries},
           {"max_in_flight", c.max_in_flight},
           {"credentials_env", c.credentials_env}};
    j["endpoint"] = c.endpoint ? Json(*c.endpoint) : Json(nullptr);
    return j;
}

ScorerConfig parse_scorer_config(const Json& j)
{
    const auto kind = j.value("kind", std::string("lexical"));
    ScorerConfig c;
    if (kind == "lexical") {
        c = lexical_scorer_config();
    } else if (kind == "remote_relevance" || kind == "remote") {
        c = remote_scorer_config(j.value("endpoint", std::string{}));
    } else {
        fail(ErrorCode::invalid_argument, "unknown scorer kind '" + kind + "'");
    }
    c.scorer_id = j.value("scorer_id", c.scorer_id);
    if (j.contains("polarity")) {
        c.polarity = polarity_from_string(j["polarity"].get<std::string>());
    }
    c.threshold = j.value("threshold", c.threshold);
    if (j.contains("endpoint") && j["endpoint"].is_string()) {
        c.endpoint = j["endpoint"].get<std::string>();
    }
    c.path = j.value("path", c.path);
    c.timeout = std::chrono::milliseconds(j.value("timeout_ms", c.timeout.count()));
    c.retry.max_retries = j.value("max_retries", c.retry.max_retries);
    c.retry.initial_backoff = std::chrono::milliseconds(j.value("initial_backoff_ms", c.retry.initial_backoff.count()));
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.credentials_env = j.value("credentials_env", c.credentials_env);
    c.validate();
    return c;
}

ScoredPrinciple score_lexical(const Quandary& quandary, const Principle& principle, const std::string& scorer_id)
{
    std::unordered_map<std::string, long long> q_tf;
    std::unordered_map<std::string, long long> p_tf;
    for (auto& t : normalize(quandary.full_text())) {
        ++q_tf[t];
    }
    for (auto& t : normalize(principle.text)) {
        ++p_tf[t];
    }
    long long dot = 0;
    long long q_norm = 0;
    long long p_norm = 0;
    for (const auto& [term, n] : q_tf) {
        q_norm += n * n;
        if (auto it = p_tf.find(term); it != p_tf.end()) {
            dot += n * it->second;
        }
    }
    for (const auto& [term, n] : p_tf) {
        p_norm += n * n;
    }
    double score = 0.0;
    if (dot > 0) {
        score = static_cast<double>(dot) / std::sqrt(static_cast<double>(q_norm) * static_cast<double>(p_norm));
        score = std::clamp(score, 0.0, 1.0);
    }
    return {principle, score, scorer_id, Polarity::higher_better};
}

ScoredPrinciple score_remote(const ScorerConfig& config, const Quandary& quandary, const Principle& principle,
                             HttpTransport& transport)
{
    require(config.endpoint.has_value(), ErrorCode::invalid_argument, "remote scorer has no endpoint");
    const Json body{{"context", quandary.full_text()}, {"principle", principle.text}, {"template", kRelevanceTemplate}};
    Headers headers;
    if (auto token = env_or_empty(config.credentials_env); !token.empty()) {
        headers.emplace_back("Authorization", "Bearer " + token);
    }
    const std::string payload = body.dump();
    const HttpResponse response = with_retries(config.retry, [&] {
        auto r = transport.post(*config.endpoint, config.path, payload, headers, config.timeout);
        if (r.status < 200 || r.status >= 300) {
            throw_for_status(r, "relevance request");
        }
        return r;
    });

    double perplexity = 0.0;
    try {
        const Json j = Json::parse(response.body);
        const Json& v = j.at("perplexity");
        require(v.is_number(), ErrorCode::scorer, "'perplexity' is not a number");
        perplexity = v.get<double>();
    } catch (const Json::exception& e) {
        fail(ErrorCode::scorer, std::string("non-conforming relevance response: ") + e.what());
    }
    require(std::isfinite(perplexity) && perplexity >= 0.0, ErrorCode::scorer,
            "relevance response carries an invalid perplexity");
    return {principle, perplexity, config.scorer_id, config.polarity};
}

LexicalScorer::LexicalScorer(ScorerConfig config) : config_(std::move(config))
{
    config_.validate();
    require(config_.kind == ScorerKind::lexical, ErrorCode::invalid_argument, "lexical scorer needs a lexical config");
    require(config_.polarity == Polarity::higher_better, ErrorCode::invalid_argument,
            "lexical scorer is higher_better");
}

ScoredPrinciple LexicalScorer::score(const Quandary& quandary, const Principle& principle)
{
    return score_lexical(quandary, principle, config_.scorer_id);
}

RemoteRelevanceScorer::RemoteRelevanceScorer(ScorerConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)),
      in_flight_(std::clamp(config_.max_in_flight, 1, 256))
{
    config_.validate();
    if (!transport_) {
        transport_ = make_default_transport();
    }
}

ScoredPrinciple RemoteRelevanceScorer::score(const Quandary& quandary, const Principle& principle)
{
    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<256>& s;
        ~Release() { s.release(); }
    } release{in_flight_};
    return score_remote(config_, quandary, principle, *transport_);
}

std::unique_ptr<Scorer> make_scorer(const ScorerConfig& config, std::shared_ptr<HttpTransport> transport)
{
    if (config.kind == ScorerKind::lexical) {
        return std::make_unique<LexicalScorer>(config);
    }
    return std::make_unique<RemoteRelevanceScorer>(config, std::move(transport));
}

PoolScores score_pool(Scorer& scorer, const Quandary& quandary, const std::vector<Principle>& candidates)
{
    PoolScores out;
    for (const auto& p : candidates) {
        try {
            out.scored.push_back(scorer.score(quandary, p));
        } catch (const Error& e) {
            log(LogLevel::warning, "scorer '" + scorer.config().scorer_id + "' dropped principle '" + p.id +
                                       "': " + e.what());
            out.dropped.push_back({p, std::string(to_string(e.code())) + ": " + e.what()});
        }
    }
    return out;
}

std::vector<ScoredPrinciple> filter_by_threshold(const std::vector<ScoredPrinciple>& candidates,
                                                 const ScorerConfig& config)
{
    std::vector<ScoredPrinciple> out;
    for (const auto& c : candidates) {
        require(c.scorer_id == config.scorer_id, ErrorCode::invalid_argument,
                "candidate scored by '" + c.scorer_id + "' filtered with config for '" + config.scorer_id + "'");
        const bool keep = config.polarity == Polarity::higher_better ? c.score >= config.threshold
                                                                     : c.score <= config.threshold;
        if (keep) {
            out.push_back(c);
        }
    }
    return out;
}

double token_jaccard(const std::string& a, const std::string& b)
{
    const auto ta = normalize(a);
    const auto tb = normalize(b);
    const std::unordered_set<std::string> sa(ta.begin(), ta.end());
    const std::unordered_set<std::string> sb(tb.begin(), tb.end());
    if (sa.empty() && sb.empty()) {
        return 0.0;
    }
    std::size_t common = 0;
    for (const auto& t : sa) {
        common += sb.count(t);
    }
    return static_cast<double>(common) / static_cast<double>(sa.size() + sb.size() - common);
}

bool near_duplicate(const Principle& a, const Principle& b, double jaccard_cutoff)
{
    auto canonical = [](const std::string& s) {
        std::string out = normalize_whitespace(s);
        std::transform(out.begin(), out.end(), out.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return out;
    };
    if (canonical(a.text) == canonical(b.text)) {
        return true;
    }
    return token_jaccard(a.text, b.text) >= jaccard_cutoff;
}

std::vector<ScoredPrinciple> dedup(const std::vector<ScoredPrinciple>& candidates, double jaccard_cutoff)
{
    std::vector<std::size_t> by_rank(candidates.size());
    for (std::size_t i = 0; i < by_rank.size(); ++i) {
        by_rank[i] = i;
    }
    std::stable_sort(by_rank.begin(), by_rank.end(), [&](std::size_t a, std::size_t b) {
        return better(candidates[a].score, candidates[b].score, candidates[a].polarity);
    });

    std::vector<bool> keep(candidates.size(), false);
    std::vector<std::size_t> kept;
    for (std::size_t i : by_rank) {
        const bool dup = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
            return near_duplicate(candidates[i].principle, candidates[k].principle, jaccard_cutoff);
        });
        if (!dup) {
            keep[i] = true;
            kept.push_back(i);
        }
    }
    std::vector<ScoredPrinciple> out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (keep[i]) {
            out.push_back(candidates[i]);
        }
    }
    return out;
}

std::vector<ScoredPrinciple> rank_sum_ensemble(const std::vector<std::vector<ScoredPrinciple>>& rankings)
{
    std::vector<Principle> universe;
    std::unordered_set<std::string> seen;
    std::vector<std::unordered_map<std::string, std::size_t>> ranks;
    for (auto ranking : rankings) {
        sort_ranked(ranking);
        auto& r = ranks.emplace_back();
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            r.emplace(ranking[i].principle.id, i + 1);
            if (seen.insert(ranking[i].principle.id).second) {
                universe.push_back(ranking[i].principle);
            }
        }
    }
    std::vector<ScoredPrinciple> out;
    for (const auto& p : universe) {
        double total = 0.0;
        for (std::size_t l = 0; l < ranks.size(); ++l) {
            auto it = ranks[l].find(p.id);
            total += static_cast<double>(it == ranks[l].end() ? rankings[l].size() + 1 : it->second);
        }
        out.push_back({p, total, "rank_sum", Polarity::lower_better});
    }
    sort_ranked(out);
    return out;
}

}  // namespace quandary
