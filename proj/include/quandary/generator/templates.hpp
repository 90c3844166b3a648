#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "quandary/common/slot_template.hpp"
#include "quandary/corpus/types.hpp"

namespace quandary {

inline constexpr const char* kTagOpen = "<p>";
inline constexpr const char* kTagClose = "</p>";
/// Line separating few-shot blocks; also the generation stop sequence.
inline constexpr const char* kExemplarDelimiter = "###";

/// A prompt template for one generation step.
///
/// Step 1 must use {context}, {question} and {principle} exactly once each and
/// may not use {prior}. Steps 2 and 3 must use {prior} and {principle} exactly
/// once each and nothing else. Violations throw Error{schema} on construction.
class PromptTemplate {
  public:
    PromptTemplate(int step, std::string text, std::string tag_open = kTagOpen, std::string tag_close = kTagClose);

    /// Reads the template text verbatim from `path`.
    static PromptTemplate load(const std::filesystem::path& path, int step);

    [[nodiscard]] int step() const noexcept { return step_; }
    [[nodiscard]] const SlotTemplate& body() const noexcept { return body_; }
    [[nodiscard]] const std::string& tag_open() const noexcept { return tag_open_; }
    [[nodiscard]] const std::string& tag_close() const noexcept { return tag_close_; }

  private:
    int step_;
    SlotTemplate body_;
    std::string tag_open_;
    std::string tag_close_;
};

struct FewShotExemplar {
    Quandary quandary;
    Principle principle;
    /// Paragraph-tagged reference answer.
    std::string answer;
};

/// Throws Error{schema} unless the answer holds at least one complete tag pair.
void validate_exemplar(const FewShotExemplar& exemplar, const PromptTemplate& tmpl);

/// JSONL: {"quandary": {...}, "principle": {...}, "answer": "<p>...</p>"}.
std::vector<FewShotExemplar> load_exemplars(const std::filesystem::path& path);

struct TemplateSet {
    PromptTemplate first;
    PromptTemplate next;
};

/// Loads prompt1.v1.txt and prompt_j.v1.txt from `dir`.
TemplateSet load_templates(const std::filesystem::path& dir);

/// Two exemplar blocks, each followed by its answer and the delimiter line,
/// then the unanswered block for `quandary` with `principle`.
/// Throws Error{invalid_argument} unless exactly two exemplars are given or
/// when the template is not a step-1 template.
std::string render_prompt1(std::span<const FewShotExemplar> exemplars, const Quandary& quandary,
                           const Principle& principle, const PromptTemplate& tmpl);

/// Appends the step-j instruction for `principle` after `prior_transcript`
/// (every earlier prompt and answer). Throws Error{precondition} when the
/// transcript is empty or has no completed answer after its last delimiter.
std::string render_prompt_j(const std::string& prior_transcript, const Principle& principle,
                            const PromptTemplate& tmpl);

struct ParagraphParse {
    std::vector<std::string> paragraphs;
    /// Set when an opening tag ran to the end of the text.
    bool unterminated = false;
};

/// Contents of each `<p>...</p>` pair in order; text outside pairs becomes
/// its own paragraph. Paragraphs are whitespace-trimmed and empty ones are
/// dropped. Stray tags inside a paragraph are removed.
ParagraphParse strip_paragraph_tags(const std::string& raw, const std::string& tag_open = kTagOpen,
                                    const std::string& tag_close = kTagClose);

}  // namespace quandary
