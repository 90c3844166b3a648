#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace quandary {

/// Lowercases ASCII and splits on every byte that is not an ASCII letter or
/// digit. No stemming, no stopword removal. Non-ASCII bytes (curly quotes,
/// dashes) act as separators.
std::vector<std::string> normalize(std::string_view text);

}  // namespace quandary
