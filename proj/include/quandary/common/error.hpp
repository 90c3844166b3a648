#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace quandary {

enum class ErrorCode {
    invalid_argument,
    precondition,
    not_found,
    conflict,
    expired,
    io,
    parse,
    schema,
    empty_input,
    no_candidates,
    backend,
    auth,
    rate_limited,
    network,
    scorer,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the project; `code()` drives CLI exit payloads
/// and HTTP status mapping in the service.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code)
    {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message)
{
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message)
{
    if (!condition) {
        throw Error(code, message);
    }
}

}  // namespace quandary
