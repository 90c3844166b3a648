#include "quandary/common/slot_template.hpp"

#include <algorithm>

#include "quandary/common/error.hpp"

namespace quandary {

namespace {

bool is_name_char(char c) { return (c >= 'a' && c <= 'z') || c == '_' || (c >= '0' && c <= '9'); }

}  // namespace

SlotTemplate::SlotTemplate(std::string text) : text_(std::move(text))
{
    std::string literal;
    for (std::size_t i = 0; i < text_.size(); ++i) {
        const char c = text_[i];
        if (c == '{' && i + 1 < text_.size() && text_[i + 1] == '{') {
            literal += '{';
            ++i;
        } else if (c == '}' && i + 1 < text_.size() && text_[i + 1] == '}') {
            literal += '}';
            ++i;
        } else if (c == '{') {
            const auto close = text_.find('}', i + 1);
            require(close != std::string::npos, ErrorCode::schema,
                    "unterminated slot at offset " + std::to_string(i));
            std::string name = text_.substr(i + 1, close - i - 1);
            require(!name.empty() && std::all_of(name.begin(), name.end(), is_name_char), ErrorCode::schema,
                    "malformed slot '{" + name + "}'");
            if (!literal.empty()) {
                pieces_.push_back({false, std::move(literal)});
                literal.clear();
            }
            pieces_.push_back({true, std::move(name)});
            i = close;
        } else if (c == '}') {
            fail(ErrorCode::schema, "unmatched '}' at offset " + std::to_string(i));
        } else {
            literal += c;
        }
    }
    if (!literal.empty()) {
        pieces_.push_back({false, std::move(literal)});
    }
}

std::vector<std::string> SlotTemplate::slot_names() const
{
    std::vector<std::string> names;
    for (const auto& p : pieces_) {
        if (p.is_slot && std::find(names.begin(), names.end(), p.value) == names.end()) {
            names.push_back(p.value);
        }
    }
    return names;
}

std::size_t SlotTemplate::occurrences(const std::string& slot) const
{
    return static_cast<std::size_t>(
        std::count_if(pieces_.begin(), pieces_.end(), [&](const Piece& p) { return p.is_slot && p.value == slot; }));
}

std::string SlotTemplate::render(const std::map<std::string, std::string>& values) const
{
    std::string out;
    for (const auto& p : pieces_) {
        if (!p.is_slot) {
            out += p.value;
            continue;
        }
        auto it = values.find(p.value);
        require(it != values.end(), ErrorCode::precondition, "no value for slot '{" + p.value + "}'");
        out += it->second;
    }
    return out;
}

}  // namespace quandary
