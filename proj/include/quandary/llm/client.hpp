#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "quandary/common/io.hpp"
#include "quandary/llm/http.hpp"

namespace quandary {

struct CompletionRequest {
    std::string prompt;
    int max_tokens = 512;
    double temperature = 0.7;
    std::vector<std::string> stop_sequences;
    /// Only the mock backend consumes this.
    std::optional<std::uint64_t> seed;
};

enum class FinishReason { stop_sequence, length, backend_stop };

std::string_view to_string(FinishReason r) noexcept;
FinishReason finish_reason_from_string(std::string_view s);

struct CompletionResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::backend_stop;
    std::string backend_id;
    std::chrono::milliseconds latency{0};
    int attempts = 1;
};

/// What a backend returns before client-side stop handling.
struct RawCompletion {
    std::string text;
    FinishReason finish_reason = FinishReason::backend_stop;
};

class CompletionBackend {
  public:
    virtual ~CompletionBackend() = default;
    [[nodiscard]] virtual std::string id() const = 0;
    /// May throw TransientError for retryable failures.
    virtual RawCompletion complete_raw(const CompletionRequest& request) = 0;
};

/// Pure deterministic completion used by tests and offline runs.
///
/// The output is a single `<p>...</p>` paragraph that embeds, verbatim, the
/// last double-quoted span in the prompt (the principle the generator
/// quotes); when the prompt has none, a stock principle picked by the hash is
/// used instead. When the text after the last closing paragraph tag asks for
/// "a different perspective", the paragraph opens with that framing. Filler
/// sentences and a hex tag are chosen from a 64-bit FNV-1a/splitmix hash of
/// the prompt, sampling parameters, and seed, so the output is identical on
/// every platform. Output longer than `max_tokens` whitespace-separated words
/// is cut with finish_reason = length.
CompletionResponse mock_complete(const CompletionRequest& request);

class MockBackend : public CompletionBackend {
  public:
    [[nodiscard]] std::string id() const override { return "mock"; }
    RawCompletion complete_raw(const CompletionRequest& request) override;

    /// Queues a canned raw output; queued outputs are served first, in order.
    void script(std::string raw_text, FinishReason reason = FinishReason::backend_stop);
    [[nodiscard]] std::size_t call_count() const;

  private:
    mutable std::mutex mutex_;
    std::deque<RawCompletion> scripted_;
    std::size_t calls_ = 0;
};

struct HttpBackendConfig {
    std::string base_url;
    std::string path = "/v1/complete";
    /// Environment variable holding the bearer token.
    std::string api_key_env = "QUANDARY_LLM_API_KEY";
    std::chrono::milliseconds timeout{60000};
};

/// Generic completion wire format:
/// POST {"prompt", "maxTokens", "temperature", "stopSequences"} →
/// {"completions": [{"text", "finishReason"}]}.
class HttpBackend : public CompletionBackend {
  public:
    HttpBackend(HttpBackendConfig config, std::shared_ptr<HttpTransport> transport);
    [[nodiscard]] std::string id() const override { return "http:" + config_.base_url; }
    RawCompletion complete_raw(const CompletionRequest& request) override;

  private:
    HttpBackendConfig config_;
    std::shared_ptr<HttpTransport> transport_;
};

struct ClientOptions {
    RetryPolicy retry;
    int max_in_flight = 4;
    /// Minimum spacing between request starts; zero disables rate limiting.
    std::chrono::milliseconds min_interval{0};
    /// Every request/response pair is appended here when set.
    std::optional<std::filesystem::path> trace_log;
};

/// Validates requests, applies the in-flight cap and rate limit, retries
/// transient failures, truncates output at the earliest stop sequence, and
/// appends an audit record per call. Safe for concurrent use.
class CompletionClient {
  public:
    CompletionClient(std::shared_ptr<CompletionBackend> backend, ClientOptions options = {});

    CompletionResponse complete(const CompletionRequest& request);

    [[nodiscard]] std::string backend_id() const { return backend_->id(); }

  private:
    std::shared_ptr<CompletionBackend> backend_;
    ClientOptions options_;
    std::counting_semaphore<1024> in_flight_;
    std::mutex rate_mutex_;
    std::chrono::steady_clock::time_point next_start_{};
    std::unique_ptr<Journal> trace_;
};

enum class BackendKind { mock, http };

struct BackendConfig {
    BackendKind kind = BackendKind::mock;
    HttpBackendConfig http;
    ClientOptions client;
};

BackendConfig parse_backend_config(const Json& j);
Json to_json(const BackendConfig& config);

std::shared_ptr<CompletionClient> make_client(const BackendConfig& config,
                                              std::shared_ptr<HttpTransport> transport = nullptr);

/// One-shot convenience over make_client(config).complete(request).
CompletionResponse complete(const BackendConfig& config, const CompletionRequest& request);

/// Cuts `text` at the earliest occurrence of any stop sequence.
/// Returns true when a cut happened.
bool truncate_at_stop(std::string& text, const std::vector<std::string>& stop_sequences);

}  // namespace quandary
