#include "quandary/llm/client.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "quandary/common/hash.hpp"

namespace quandary {

namespace {

constexpr std::array kStockPrinciples = {
    "It is important to be honest with the people who depend on you.",
    "You should not put others at risk for your own convenience.",
    "It is good to keep the promises you make.",
    "People should take responsibility for the consequences of their choices.",
    "It is wrong to take credit for work that is not yours.",
    "You should treat others with fairness and respect.",
    "It is kind to help those who cannot help themselves.",
    "You should respect other people's privacy.",
};

constexpr std::array kOpeners = {
    "Weigh what each person involved stands to lose.",
    "The situation you describe puts that obligation under real strain.",
    "Good intentions do not settle the matter on their own.",
    "It helps to ask what you would expect if the roles were reversed.",
    "Your discomfort is a sign that something of value is at stake.",
    "Nobody here is acting in bad faith, which makes this harder.",
    "The people affected deserve to hear your reasons directly.",
    "Small choices like this one shape the trust others place in you.",
};

constexpr std::array kClosers = {
    "A frank conversation is the place to start.",
    "Whatever you decide, be prepared to explain it.",
    "You are not obliged to resolve every tension at once.",
    "That is a reasonable standard to hold yourself to.",
    "Acting on it may cost you something, and that cost is worth naming.",
    "It is fair to ask others to meet you halfway.",
    "Your first duty is to avoid making things worse.",
    "Silence would be its own kind of answer.",
};

std::string format_double(double v)
{
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

std::optional<std::string> last_quoted_span(const std::string& prompt)
{
    const auto close = prompt.rfind('"');
    if (close == std::string::npos || close == 0) {
        return std::nullopt;
    }
    const auto open = prompt.rfind('"', close - 1);
    if (open == std::string::npos) {
        return std::nullopt;
    }
    std::string span = prompt.substr(open + 1, close - open - 1);
    if (span.empty() || span.find('\n') != std::string::npos) {
        return std::nullopt;
    }
    return span;
}

bool asks_for_other_perspective(const std::string& prompt)
{
    const auto last_close = prompt.rfind("</p>");
    std::string tail = last_close == std::string::npos ? prompt : prompt.substr(last_close);
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return tail.find("different perspective") != std::string::npos;
}

std::string describe(const CompletionRequest& r)
{
    std::string key = r.prompt;
    key += '\x1f';
    key += std::to_string(r.max_tokens);
    key += '\x1f';
    key += format_double(r.temperature);
    for (const auto& s : r.stop_sequences) {
        key += '\x1f';
        key += s;
    }
    return key;
}

Json request_json(const CompletionRequest& r)
{
    Json j{{"prompt", r.prompt},
           {"max_tokens", r.max_tokens},
           {"temperature", r.temperature},
           {"stop_sequences", r.stop_sequences}};
    if (r.seed) {
        j["seed"] = *r.seed;
    }
    return j;
}

}  // namespace

std::string_view to_string(FinishReason r) noexcept
{
    switch (r) {
    case FinishReason::stop_sequence: return "stop_sequence";
    case FinishReason::length: return "length";
    case FinishReason::backend_stop: return "backend_stop";
    }
    return "backend_stop";
}

FinishReason finish_reason_from_string(std::string_view s)
{
    if (s == "stop_sequence" || s == "stopSequence") return FinishReason::stop_sequence;
    if (s == "length") return FinishReason::length;
    return FinishReason::backend_stop;
}

bool truncate_at_stop(std::string& text, const std::vector<std::string>& stop_sequences)
{
    std::size_t cut = std::string::npos;
    for (const auto& stop : stop_sequences) {
        if (stop.empty()) {
            continue;
        }
        cut = std::min(cut, text.find(stop));
    }
    if (cut == std::string::npos) {
        return false;
    }
    text.resize(cut);
    return true;
}

CompletionResponse mock_complete(const CompletionRequest& request)
{
    const std::uint64_t h = hash_with_seed(describe(request), request.seed.value_or(0));

    std::string principle;
    if (auto quoted = last_quoted_span(request.prompt)) {
        principle = *quoted;
    } else {
        principle = kStockPrinciples[h % kStockPrinciples.size()];
    }
    std::string body;
    if (asks_for_other_perspective(request.prompt)) {
        body += "From a different perspective, consider this: ";
    }
    body += principle;
    body += ' ';
    body += kOpeners[(h >> 8U) % kOpeners.size()];
    body += ' ';
    body += kClosers[(h >> 16U) % kClosers.size()];
    body += " [mock ";
    body += to_hex(h >> 32U, 8);
    body += "]";

    std::string text = "<p>" + body + "</p>";
    CompletionResponse response;
    response.backend_id = "mock";
    response.finish_reason = FinishReason::backend_stop;

    std::istringstream words(text);
    std::vector<std::string> tokens;
    for (std::string w; words >> w;) {
        tokens.push_back(std::move(w));
    }
    if (request.max_tokens > 0 && tokens.size() > static_cast<std::size_t>(request.max_tokens)) {
        tokens.resize(static_cast<std::size_t>(request.max_tokens));
        text.clear();
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            text += (i == 0 ? "" : " ") + tokens[i];
        }
        response.finish_reason = FinishReason::length;
    }
    if (truncate_at_stop(text, request.stop_sequences)) {
        response.finish_reason = FinishReason::stop_sequence;
    }
    response.text = std::move(text);
    return response;
}

RawCompletion MockBackend::complete_raw(const CompletionRequest& request)
{
    {
        std::lock_guard lock(mutex_);
        ++calls_;
        if (!scripted_.empty()) {
            RawCompletion next = std::move(scripted_.front());
            scripted_.pop_front();
            return next;
        }
    }
    auto r = mock_complete(request);
    return {std::move(r.text), r.finish_reason};
}

void MockBackend::script(std::string raw_text, FinishReason reason)
{
    std::lock_guard lock(mutex_);
    scripted_.push_back({std::move(raw_text), reason});
}

std::size_t MockBackend::call_count() const
{
    std::lock_guard lock(mutex_);
    return calls_;
}

HttpBackend::HttpBackend(HttpBackendConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport))
{
    require(!config_.base_url.empty(), ErrorCode::invalid_argument, "http backend requires a base URL");
    if (!transport_) {
        transport_ = make_default_transport();
    }
}

RawCompletion HttpBackend::complete_raw(const CompletionRequest& request)
{
    const Json body{{"prompt", request.prompt},
                    {"maxTokens", request.max_tokens},
                    {"temperature", request.temperature},
                    {"stopSequences", request.stop_sequences}};
    Headers headers;
    if (auto key = env_or_empty(config_.api_key_env); !key.empty()) {
        headers.emplace_back("Authorization", "Bearer " + key);
    }
    const auto response = transport_->post(config_.base_url, config_.path, body.dump(), headers, config_.timeout);
    if (response.status < 200 || response.status >= 300) {
        throw_for_status(response, "completion request");
    }
    try {
        const Json j = Json::parse(response.body);
        const Json& first = j.at("completions").at(0);
        RawCompletion out;
        out.text = first.at("text").get<std::string>();
        out.finish_reason = finish_reason_from_string(first.value("finishReason", "stop"));
        return out;
    } catch (const Json::exception& e) {
        fail(ErrorCode::backend, std::string("malformed completion payload: ") + e.what());
    }
}

CompletionClient::CompletionClient(std::shared_ptr<CompletionBackend> backend, ClientOptions options)
    : backend_(std::move(backend)), options_(std::move(options)),
      in_flight_(std::clamp(options_.max_in_flight, 1, 1024))
{
    require(backend_ != nullptr, ErrorCode::invalid_argument, "completion client requires a backend");
    if (options_.trace_log) {
        trace_ = std::make_unique<Journal>(*options_.trace_log);
    }
}

CompletionResponse CompletionClient::complete(const CompletionRequest& request)
{
    require(!request.prompt.empty(), ErrorCode::invalid_argument, "prompt must be non-empty");
    require(request.max_tokens >= 1, ErrorCode::invalid_argument, "max_tokens must be at least 1");
    require(request.temperature >= 0.0, ErrorCode::invalid_argument, "temperature must be non-negative");

    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{in_flight_};

    if (options_.min_interval.count() > 0) {
        std::unique_lock lock(rate_mutex_);
        const auto now = std::chrono::steady_clock::now();
        const auto start = std::max(now, next_start_);
        next_start_ = start + options_.min_interval;
        lock.unlock();
        std::this_thread::sleep_until(start);
    }

    Json retries = Json::array();
    int attempts = 0;
    const auto started = std::chrono::steady_clock::now();
    auto log = [&](Json record) {
        if (trace_) {
            record["backend"] = backend_->id();
            record["request"] = request_json(request);
            record["attempts"] = attempts;
            record["retries"] = retries;
            record["latency_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                       std::chrono::steady_clock::now() - started)
                                       .count();
            trace_->append(record);
        }
    };

    RawCompletion raw;
    try {
        raw = with_retries(
            options_.retry,
            [&] {
                ++attempts;
                return backend_->complete_raw(request);
            },
            [&](const TransientError& e) {
                retries.push_back({{"code", to_string(e.code())}, {"message", e.what()}});
            });
    } catch (const Error& e) {
        log({{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}});
        throw;
    }

    CompletionResponse response;
    response.backend_id = backend_->id();
    response.attempts = attempts;
    response.text = std::move(raw.text);
    response.finish_reason =
        truncate_at_stop(response.text, request.stop_sequences) ? FinishReason::stop_sequence : raw.finish_reason;
    response.latency =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    log({{"response", {{"text", response.text}, {"finish_reason", to_string(response.finish_reason)}}}});
    return response;
}

BackendConfig parse_backend_config(const Json& j)
{
    BackendConfig c;
    const auto kind = j.value("kind", std::string("mock"));
    if (kind == "mock") {
        c.kind = BackendKind::mock;
    } else if (kind == "http") {
        c.kind = BackendKind::http;
    } else {
        fail(ErrorCode::invalid_argument, "unknown backend kind '" + kind + "'");
    }
    c.http.base_url = j.value("base_url", c.http.base_url);
    c.http.path = j.value("path", c.http.path);
    c.http.api_key_env = j.value("api_key_env", c.http.api_key_env);
    c.http.timeout = std::chrono::milliseconds(j.value("timeout_ms", c.http.timeout.count()));
    c.client.retry.max_retries = j.value("max_retries", c.client.retry.max_retries);
    c.client.retry.initial_backoff =
        std::chrono::milliseconds(j.value("initial_backoff_ms", c.client.retry.initial_backoff.count()));
    c.client.max_in_flight = j.value("max_in_flight", c.client.max_in_flight);
    c.client.min_interval = std::chrono::milliseconds(j.value("min_interval_ms", c.client.min_interval.count()));
    if (j.contains("trace_log") && j["trace_log"].is_string()) {
        c.client.trace_log = j["trace_log"].get<std::string>();
    }
    return c;
}

Json to_json(const BackendConfig& c)
{
    Json j{{"kind", c.kind == BackendKind::mock ? "mock" : "http"},
           {"base_url", c.http.base_url},
           {"path", c.http.path},
           {"api_key_env", c.http.api_key_env},
           {"timeout_ms", c.http.timeout.count()},
           {"max_retries", c.client.retry.max_retries},
           {"initial_backoff_ms", c.client.retry.initial_backoff.count()},
           {"max_in_flight", c.client.max_in_flight},
           {"min_interval_ms", c.client.min_interval.count()}};
    if (c.client.trace_log) {
        j["trace_log"] = c.client.trace_log->string();
    }
    return j;
}

std::shared_ptr<CompletionClient> make_client(const BackendConfig& config, std::shared_ptr<HttpTransport> transport)
{
    std::shared_ptr<CompletionBackend> backend;
    if (config.kind == BackendKind::mock) {
        backend = std::make_shared<MockBackend>();
    } else {
        backend = std::make_shared<HttpBackend>(config.http, std::move(transport));
    }
    return std::make_shared<CompletionClient>(std::move(backend), config.client);
}

CompletionResponse complete(const BackendConfig& config, const CompletionRequest& request)
{
    return make_client(config)->complete(request);
}

}  // namespace quandary
