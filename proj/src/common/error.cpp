#include "quandary/common/error.hpp"

namespace quandary {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::expired: return "expired";
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::schema: return "schema";
    case ErrorCode::empty_input: return "empty_input";
    case ErrorCode::no_candidates: return "no_candidates";
    case ErrorCode::backend: return "backend";
    case ErrorCode::auth: return "auth";
    case ErrorCode::rate_limited: return "rate_limited";
    case ErrorCode::network: return "network";
    case ErrorCode::scorer: return "scorer";
    }
    return "unknown";
}

}  // namespace quandary
