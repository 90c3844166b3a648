#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "quandary/llm/http.hpp"
#include "quandary/retrieval/index.hpp"

namespace quandary {

enum class ScorerKind { lexical, remote_relevance };

/// Threshold used for the perplexity relevance scorer (lower is better).
inline constexpr double kRelevanceThreshold = 1.02;
/// Default cut for the lexical tf-cosine scorer, whose scores lie in [0, 1].
inline constexpr double kLexicalThreshold = 0.1;

/// Relevance prompt sent to the remote scorer with its slots unfilled.
inline constexpr const char* kRelevanceTemplate =
    "Context: {context} Principle: {principle} \n Is the principle relevant to the context?";

struct ScorerConfig {
    std::string scorer_id = "relevance";
    ScorerKind kind = ScorerKind::remote_relevance;
    Polarity polarity = Polarity::lower_better;
    double threshold = kRelevanceThreshold;
    std::optional<std::string> endpoint;

    // Remote transport settings.
    std::string path = "/v1/relevance";
    std::chrono::milliseconds timeout{30000};
    RetryPolicy retry;
    int max_in_flight = 4;
    /// Environment variable holding a bearer token for the endpoint.
    std::string credentials_env = "QUANDARY_SCORER_TOKEN";

    /// Throws Error{invalid_argument} when the invariants do not hold.
    void validate() const;
};

ScorerConfig lexical_scorer_config(double threshold = kLexicalThreshold);
ScorerConfig remote_scorer_config(std::string endpoint, double threshold = kRelevanceThreshold);

Json to_json(const ScorerConfig& c);
ScorerConfig parse_scorer_config(const Json& j);

/// Cosine similarity of term-frequency vectors over normalize() tokens of the
/// quandary (context + question) and the principle. Zero when either side
/// has no tokens.
ScoredPrinciple score_lexical(const Quandary& quandary, const Principle& principle,
                              const std::string& scorer_id = "lexical");

/// One relevance request:
/// POST {"context", "principle", "template"} → {"perplexity": number}.
/// Retries transient failures per `config.retry`; a response without a
/// finite non-negative "perplexity" throws Error{scorer}.
ScoredPrinciple score_remote(const ScorerConfig& config, const Quandary& quandary, const Principle& principle,
                             HttpTransport& transport);

class Scorer {
  public:
    virtual ~Scorer() = default;
    [[nodiscard]] virtual const ScorerConfig& config() const = 0;
    virtual ScoredPrinciple score(const Quandary& quandary, const Principle& principle) = 0;
};

class LexicalScorer : public Scorer {
  public:
    explicit LexicalScorer(ScorerConfig config = lexical_scorer_config());
    [[nodiscard]] const ScorerConfig& config() const override { return config_; }
    ScoredPrinciple score(const Quandary& quandary, const Principle& principle) override;

  private:
    ScorerConfig config_;
};

/// Caps concurrent requests at `config.max_in_flight`.
class RemoteRelevanceScorer : public Scorer {
  public:
    RemoteRelevanceScorer(ScorerConfig config, std::shared_ptr<HttpTransport> transport = nullptr);
    [[nodiscard]] const ScorerConfig& config() const override { return config_; }
    ScoredPrinciple score(const Quandary& quandary, const Principle& principle) override;

  private:
    ScorerConfig config_;
    std::shared_ptr<HttpTransport> transport_;
    std::counting_semaphore<256> in_flight_;
};

std::unique_ptr<Scorer> make_scorer(const ScorerConfig& config, std::shared_ptr<HttpTransport> transport = nullptr);

struct DroppedCandidate {
    Principle principle;
    std::string reason;
};

struct PoolScores {
    std::vector<ScoredPrinciple> scored;
    std::vector<DroppedCandidate> dropped;
};

/// Scores each candidate; a candidate whose scorer call fails is dropped
/// with the error recorded, and a warning is logged.
PoolScores score_pool(Scorer& scorer, const Quandary& quandary, const std::vector<Principle>& candidates);

/// Keeps score >= threshold (higher_better) or score <= threshold
/// (lower_better), preserving order. All candidates must carry
/// `config.scorer_id`.
std::vector<ScoredPrinciple> filter_by_threshold(const std::vector<ScoredPrinciple>& candidates,
                                                 const ScorerConfig& config);

inline constexpr double kDedupJaccard = 0.8;

/// Same lowercased whitespace-normalized text, or normalize() token-set
/// Jaccard similarity >= `jaccard_cutoff`.
bool near_duplicate(const Principle& a, const Principle& b, double jaccard_cutoff = kDedupJaccard);

double token_jaccard(const std::string& a, const std::string& b);

/// Removes near-duplicates. Within a duplicate group the better-scored
/// member survives (earlier position on ties); survivors keep input order.
std::vector<ScoredPrinciple> dedup(const std::vector<ScoredPrinciple>& candidates,
                                   double jaccard_cutoff = kDedupJaccard);

/// Rank-sum fusion of several rankings of the same pool. Each list is
/// sorted under its own polarity; a candidate's fused score is the sum of
/// its 1-based ranks, with absent candidates ranked one past the end of
/// that list. Scorer id "rank_sum", lower_better.
std::vector<ScoredPrinciple> rank_sum_ensemble(const std::vector<std::vector<ScoredPrinciple>>& rankings);

}  // namespace quandary
