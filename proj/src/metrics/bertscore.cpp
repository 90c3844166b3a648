#include "quandary/metrics/bertscore.hpp"

#include <cmath>
#include <unordered_map>

#include "quandary/common/io.hpp"
#include "quandary/common/log.hpp"
#include "quandary/retrieval/normalize.hpp"

namespace quandary {

std::vector<Embedding> OneHotProvider::embed(const std::vector<std::string>& tokens)
{
    std::unordered_map<std::string, std::size_t> axis;
    for (const auto& t : tokens) {
        axis.try_emplace(t, axis.size());
    }
    std::vector<Embedding> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        Embedding v(axis.size(), 0.0);
        v[axis.at(t)] = 1.0;
        out.push_back(std::move(v));
    }
    return out;
}

TableProvider::TableProvider(std::map<std::string, Embedding> table) : table_(std::move(table)) {}

TableProvider TableProvider::load(const std::filesystem::path& path)
{
    const Json j = Json::parse(read_file(path));
    std::map<std::string, Embedding> table;
    for (const auto& [token, vec] : j.items()) {
        table[token] = vec.get<Embedding>();
    }
    return TableProvider(std::move(table));
}

std::vector<Embedding> TableProvider::embed(const std::vector<std::string>& tokens)
{
    std::vector<Embedding> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        auto it = table_.find(t);
        require(it != table_.end(), ErrorCode::not_found, "no embedding for token '" + t + "'");
        out.push_back(it->second);
    }
    return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport))
{
    require(!config_.base_url.empty(), ErrorCode::invalid_argument, "embedding provider requires a base URL");
    if (!transport_) {
        transport_ = make_default_transport();
    }
}

std::vector<Embedding> HttpEmbeddingProvider::embed(const std::vector<std::string>& tokens)
{
    Headers headers;
    if (auto key = env_or_empty(config_.api_key_env); !key.empty()) {
        headers.emplace_back("Authorization", "Bearer " + key);
    }
    const std::string payload = Json{{"tokens", tokens}}.dump();
    const HttpResponse response = with_retries(config_.retry, [&] {
        auto r = transport_->post(config_.base_url, config_.path, payload, headers, config_.timeout);
        if (r.status < 200 || r.status >= 300) {
            throw_for_status(r, "embedding request");
        }
        return r;
    });
    std::vector<Embedding> vectors;
    try {
        vectors = Json::parse(response.body).at("vectors").get<std::vector<Embedding>>();
    } catch (const Json::exception& e) {
        fail(ErrorCode::backend, std::string("malformed embedding response: ") + e.what());
    }
    require(vectors.size() == tokens.size(), ErrorCode::backend,
            "embedding response has " + std::to_string(vectors.size()) + " vectors for " +
                std::to_string(tokens.size()) + " tokens");
    return vectors;
}

namespace {

std::vector<Embedding> unit_vectors(std::vector<Embedding> vectors)
{
    const std::size_t dim = vectors.empty() ? 0 : vectors.front().size();
    for (auto& v : vectors) {
        require(v.size() == dim && dim > 0, ErrorCode::backend, "embeddings have inconsistent dimensions");
        double norm = 0.0;
        for (double x : v) {
            norm += x * x;
        }
        norm = std::sqrt(norm);
        require(norm > 0.0 && std::isfinite(norm), ErrorCode::backend, "embedding cannot be normalized");
        for (double& x : v) {
            x /= norm;
        }
    }
    return vectors;
}

double dot(const Embedding& a, const Embedding& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double greedy_side(const std::vector<Embedding>& from, const std::vector<Embedding>& to)
{
    double sum = 0.0;
    for (const auto& f : from) {
        double best = -1.0;
        for (const auto& t : to) {
            best = std::max(best, dot(f, t));
        }
        sum += best;
    }
    return sum / static_cast<double>(from.size());
}

}  // namespace

PairScore bertscore_tokens(const std::vector<std::string>& candidate, const std::vector<std::string>& reference,
                           EmbeddingProvider& provider)
{
    PairScore s;
    s.metric = MetricKind::bertscore;
    if (candidate.empty() || reference.empty()) {
        log(LogLevel::warning, "bertscore: empty token list, scoring 0");
        return s;
    }
    std::vector<std::string> all = candidate;
    all.insert(all.end(), reference.begin(), reference.end());
    auto vectors = provider.embed(all);
    require(vectors.size() == all.size(), ErrorCode::backend, "embedding provider returned the wrong vector count");
    vectors = unit_vectors(std::move(vectors));
    const std::vector<Embedding> cand(vectors.begin(), vectors.begin() + static_cast<std::ptrdiff_t>(candidate.size()));
    const std::vector<Embedding> ref(vectors.begin() + static_cast<std::ptrdiff_t>(candidate.size()), vectors.end());
    s.precision = greedy_side(cand, ref);
    s.recall = greedy_side(ref, cand);
    s.f1 = f1_score(s.precision, s.recall);
    return s;
}

PairScore bertscore(const std::string& candidate, const std::string& reference, EmbeddingProvider& provider)
{
    return bertscore_tokens(normalize(candidate), normalize(reference), provider);
}

}  // namespace quandary
