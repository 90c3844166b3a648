#pragma once

#include <map>
#include <string>
#include <vector>

namespace quandary {

/// Text with named `{slot}` placeholders. `{{` and `}}` produce literal
/// braces. Rendering is a single pass, so values are inserted verbatim and
/// never re-scanned for slots.
class SlotTemplate {
  public:
    /// Throws Error{schema} on an unterminated or malformed slot.
    explicit SlotTemplate(std::string text);

    [[nodiscard]] const std::string& text() const noexcept { return text_; }
    /// Slot names in order of first appearance.
    [[nodiscard]] std::vector<std::string> slot_names() const;
    [[nodiscard]] std::size_t occurrences(const std::string& slot) const;

    /// Throws Error{precondition} when a slot has no value.
    [[nodiscard]] std::string render(const std::map<std::string, std::string>& values) const;

  private:
    struct Piece {
        bool is_slot = false;
        std::string value;
    };

    std::string text_;
    std::vector<Piece> pieces_;
};

}  // namespace quandary
