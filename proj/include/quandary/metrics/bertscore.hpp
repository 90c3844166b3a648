#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "quandary/llm/http.hpp"
#include "quandary/metrics/rouge.hpp"

namespace quandary {

using Embedding = std::vector<double>;

/// Maps tokens to vectors. One call embeds every token of a pair, so
/// contextual providers may see the whole sequence.
class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    [[nodiscard]] virtual std::string id() const = 0;
    virtual std::vector<Embedding> embed(const std::vector<std::string>& tokens) = 0;
};

/// Each distinct token in a call gets its own axis.
class OneHotProvider : public EmbeddingProvider {
  public:
    [[nodiscard]] std::string id() const override { return "one_hot"; }
    std::vector<Embedding> embed(const std::vector<std::string>& tokens) override;
};

/// Fixed lookup table; unknown tokens throw Error{not_found}.
class TableProvider : public EmbeddingProvider {
  public:
    explicit TableProvider(std::map<std::string, Embedding> table);
    /// JSON object {"token": [numbers], ...}.
    static TableProvider load(const std::filesystem::path& path);
    [[nodiscard]] std::string id() const override { return "table"; }
    std::vector<Embedding> embed(const std::vector<std::string>& tokens) override;

  private:
    std::map<std::string, Embedding> table_;
};

struct HttpEmbeddingConfig {
    std::string base_url;
    std::string path = "/v1/embed";
    std::chrono::milliseconds timeout{30000};
    RetryPolicy retry;
    std::string api_key_env = "QUANDARY_EMBED_API_KEY";
};

/// POST {"tokens": [str]} → {"vectors": [[number]]}.
class HttpEmbeddingProvider : public EmbeddingProvider {
  public:
    explicit HttpEmbeddingProvider(HttpEmbeddingConfig config, std::shared_ptr<HttpTransport> transport = nullptr);
    [[nodiscard]] std::string id() const override { return "http:" + config_.base_url; }
    std::vector<Embedding> embed(const std::vector<std::string>& tokens) override;

  private:
    HttpEmbeddingConfig config_;
    std::shared_ptr<HttpTransport> transport_;
};

/// Greedy-matching BERTScore over normalize() tokens: recall averages, over
/// reference tokens, the best cosine to any candidate token; precision is
/// the mirror image. No idf weighting, no baseline rescaling. An empty side
/// scores 0 and logs a warning. Zero vectors or inconsistent dimensions
/// throw Error{backend}.
PairScore bertscore(const std::string& candidate, const std::string& reference, EmbeddingProvider& provider);
PairScore bertscore_tokens(const std::vector<std::string>& candidate, const std::vector<std::string>& reference,
                           EmbeddingProvider& provider);

}  // namespace quandary
