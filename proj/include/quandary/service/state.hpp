#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "quandary/analysis/annotation.hpp"
#include "quandary/corpus/store.hpp"
#include "quandary/service/config.hpp"

namespace quandary {

struct ApiRequest {
    std::string method;
    std::string path;
    std::string body;
    std::map<std::string, std::string> query;
    /// Keys lowercased.
    std::map<std::string, std::string> headers;
};

struct ApiResponse {
    int status = 200;
    Json body;
};

enum class SessionKind { principle_review, annotation };

std::string_view to_string(SessionKind k) noexcept;

/// One blinded pair in an annotation queue. Texts are stored by label.
struct SessionItem {
    std::string pair_id;
    std::string quandary_id;
    std::string text_a;
    std::string text_b;
};

struct SessionState {
    std::string session_id;
    SessionKind kind = SessionKind::annotation;
    std::string annotator;
    std::vector<SessionItem> queue;
    /// Criteria already voted per pair.
    std::map<std::string, std::vector<Criterion>> votes;
    std::size_t completed = 0;
};

/// The HTTP API without the transport: routes requests, enforces the bearer
/// token, and persists every transition to JSONL journals under
/// `config.state_dir` before answering. Journals are replayed on
/// construction. Safe for concurrent calls.
class Service {
  public:
    using Clock = std::chrono::system_clock;

    explicit Service(ServiceConfig config, std::shared_ptr<HttpTransport> transport = nullptr,
                     std::function<Clock::time_point()> clock = [] { return Clock::now(); });
    ~Service();

    ApiResponse handle(const ApiRequest& request);

    /// Rewrites every journal with its current minimal contents.
    void compact();

    [[nodiscard]] const ServiceConfig& config() const noexcept { return config_; }
    [[nodiscard]] std::vector<AnnotationRecord> annotations() const;
    [[nodiscard]] BlindingMap blinding() const;

  private:
    struct Impl;
    ServiceConfig config_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace quandary
