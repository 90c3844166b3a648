#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "quandary/common/error.hpp"

namespace quandary {

using Headers = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
    /// 0 when no HTTP response was received (connect/read failure).
    int status = 0;
    std::string body;
    std::string transport_error;
};

/// Minimal POST-only transport so that clients can be exercised against
/// recording or scripted fakes.
class HttpTransport {
  public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const std::string& base_url, const std::string& path, const std::string& body,
                              const Headers& headers, std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed transport (plain HTTP).
std::shared_ptr<HttpTransport> make_default_transport();

/// A failure that may succeed if the same request is sent again.
class TransientError : public Error {
  public:
    using Error::Error;
};

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{200};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{5000};
};

/// Runs `attempt` until it returns, retrying TransientError with exponential
/// backoff. After `max_retries` retries the last TransientError is rethrown
/// as a plain Error with the same code. Non-transient errors propagate
/// immediately. `on_retry` sees each transient failure before the wait.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& attempt,
                  const std::function<void(const TransientError&)>& on_retry = {}) -> decltype(attempt())
{
    auto backoff = policy.initial_backoff;
    for (int tries = 0;; ++tries) {
        try {
            return attempt();
        } catch (const TransientError& e) {
            if (tries >= policy.max_retries) {
                throw Error(e.code(), std::string(e.what()) + " (after " + std::to_string(tries + 1) + " attempts)");
            }
            if (on_retry) {
                on_retry(e);
            }
            if (backoff.count() > 0) {
                std::this_thread::sleep_for(backoff);
            }
            backoff = std::min(policy.max_backoff,
                               std::chrono::milliseconds(static_cast<long long>(
                                   static_cast<double>(backoff.count()) * policy.multiplier)));
        }
    }
}

/// Maps a non-2xx response onto the error taxonomy: 0 → transient network,
/// 429 → transient rate_limited, 5xx → transient backend, 401/403 → auth,
/// other 4xx → backend (request rejected, not retried).
[[noreturn]] void throw_for_status(const HttpResponse& response, const std::string& what);

/// Reads an environment variable; empty when unset.
std::string env_or_empty(const std::string& name);

}  // namespace quandary
