#include "quandary/llm/http.hpp"

#include <cstdlib>

#include <httplib.h>

namespace quandary {

namespace {

class HttplibTransport : public HttpTransport {
  public:
    HttpResponse post(const std::string& base_url, const std::string& path, const std::string& body,
                      const Headers& headers, std::chrono::milliseconds timeout) override
    {
        httplib::Client client(base_url);
        const auto seconds = timeout.count() / 1000;
        const auto micros = (timeout.count() % 1000) * 1000;
        client.set_connection_timeout(seconds, micros);
        client.set_read_timeout(seconds, micros);
        client.set_write_timeout(seconds, micros);
        httplib::Headers h;
        for (const auto& [k, v] : headers) {
            h.emplace(k, v);
        }
        auto result = client.Post(path, h, body, "application/json");
        if (!result) {
            return {0, {}, httplib::to_string(result.error())};
        }
        return {result->status, result->body, {}};
    }
};

}  // namespace

std::shared_ptr<HttpTransport> make_default_transport()
{
    return std::make_shared<HttplibTransport>();
}

void throw_for_status(const HttpResponse& response, const std::string& what)
{
    const int s = response.status;
    if (s == 0) {
        throw TransientError(ErrorCode::network, what + ": " + response.transport_error);
    }
    const std::string detail = what + ": HTTP " + std::to_string(s);
    if (s == 429) {
        throw TransientError(ErrorCode::rate_limited, detail);
    }
    if (s >= 500) {
        throw TransientError(ErrorCode::backend, detail);
    }
    if (s == 401 || s == 403) {
        throw Error(ErrorCode::auth, detail);
    }
    throw Error(ErrorCode::backend, detail + " (request rejected)");
}

std::string env_or_empty(const std::string& name)
{
    if (name.empty()) {
        return {};
    }
    const char* value = std::getenv(name.c_str());
    return value == nullptr ? std::string{} : std::string(value);
}

}  // namespace quandary
