#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quandary/generator/templates.hpp"
#include "quandary/llm/client.hpp"
#include "quandary/scoring/selection.hpp"

namespace quandary {

/// Precautionary sentence placed before and after every presented answer.
inline constexpr const char* kDisclaimer =
    "The answer is generated by an AI algorithm, please proceed with caution";

/// Disclaimer, blank line, text, blank line, disclaimer. Not idempotent:
/// wrap once, at presentation time. Throws Error{precondition} for
/// whitespace-only text.
std::string wrap_disclaimer(const std::string& text);

struct AnswerSegment {
    int index = 0;
    std::string principle_id;
    std::string text;
    std::string raw;
    FinishReason finish_reason = FinishReason::backend_stop;
};

struct GenerationStep {
    int step = 0;
    std::string prompt;
    std::string raw;
    FinishReason finish_reason = FinishReason::backend_stop;
    std::string backend_id;
    int attempts = 1;
    bool unterminated_paragraph = false;
};

struct GeneratedAnswer {
    std::string quandary_id;
    PrincipleSelection selection;
    std::vector<AnswerSegment> segments;
    std::string concatenated;
    std::string disclaimer_wrapped;
    std::vector<GenerationStep> trace;
    bool complete = true;
    std::optional<std::string> error;
};

Json to_json(const GeneratedAnswer& a);
GeneratedAnswer parse_generated_answer(const Json& j);

struct GenerationOptions {
    int max_tokens = 512;
    double temperature = 0.7;
    std::uint64_t seed = 0;
};

/// Thrown when the backend fails part-way; carries the partial answer
/// (complete == false) with the trace of the steps that did run.
class GenerationError : public Error {
  public:
    GenerationError(ErrorCode code, const std::string& message, GeneratedAnswer partial)
        : Error(code, message), partial_(std::move(partial))
    {}
    [[nodiscard]] const GeneratedAnswer& partial() const noexcept { return partial_; }

  private:
    GeneratedAnswer partial_;
};

/// Step 1 renders the two-shot prompt for the first principle; each later
/// step appends the step-j instruction to the full transcript so far. Every
/// completion stops at the exemplar delimiter. Segments are the tag-stripped
/// paragraphs of each reply, joined by blank lines; the answer is the
/// segments joined by blank lines, then disclaimer-wrapped.
GeneratedAnswer generate_answer(const Quandary& quandary, const PrincipleSelection& selection,
                                CompletionClient& client, const TemplateSet& templates,
                                std::span<const FewShotExemplar> exemplars, const GenerationOptions& options = {});

}  // namespace quandary
