#include "quandary/retrieval/normalize.hpp"

namespace quandary {

std::vector<std::string> normalize(std::string_view text)
{
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        const auto c = static_cast<unsigned char>(raw);
        const bool digit = c >= '0' && c <= '9';
        const bool upper = c >= 'A' && c <= 'Z';
        const bool lower = c >= 'a' && c <= 'z';
        if (digit || lower) {
            current += static_cast<char>(c);
        } else if (upper) {
            current += static_cast<char>(c - 'A' + 'a');
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

}  // namespace quandary
