#include "quandary/generator/templates.hpp"

#include <algorithm>
#include <set>

#include "quandary/common/error.hpp"
#include "quandary/common/io.hpp"

namespace quandary {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

void erase_all(std::string& s, const std::string& needle)
{
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos)) {
        s.erase(pos, needle.size());
    }
}

std::string join_lines(const std::vector<std::string>& lines)
{
    std::string out;
    for (const auto& line : lines) {
        if (!out.empty()) {
            out += '\n';
        }
        out += line;
    }
    return out;
}

std::string fill_block(const PromptTemplate& tmpl, const Quandary& q, const Principle& p)
{
    return tmpl.body().render({{"context", join_lines(q.context)}, {"question", q.question}, {"principle", p.text}});
}

}  // namespace

PromptTemplate::PromptTemplate(int step, std::string text, std::string tag_open, std::string tag_close)
    : step_(step), body_(std::move(text)), tag_open_(std::move(tag_open)), tag_close_(std::move(tag_close))
{
    require(step_ >= 1 && step_ <= 3, ErrorCode::schema, "template step must be 1, 2 or 3");
    const std::set<std::string> required = step_ == 1 ? std::set<std::string>{"context", "question", "principle"}
                                                      : std::set<std::string>{"prior", "principle"};
    for (const auto& name : body_.slot_names()) {
        require(required.contains(name), ErrorCode::schema,
                "slot '{" + name + "}' is not allowed in a step-" + std::to_string(step_) + " template");
    }
    for (const auto& name : required) {
        const auto n = body_.occurrences(name);
        require(n == 1, ErrorCode::schema,
                "slot '{" + name + "}' must appear exactly once in a step-" + std::to_string(step_) +
                    " template (found " + std::to_string(n) + ")");
    }
    require(!tag_open_.empty() && !tag_close_.empty(), ErrorCode::schema, "paragraph tags must be non-empty");
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path, int step)
{
    return PromptTemplate(step, read_file(path));
}

void validate_exemplar(const FewShotExemplar& exemplar, const PromptTemplate& tmpl)
{
    const auto open = exemplar.answer.find(tmpl.tag_open());
    const bool paired = open != std::string::npos &&
                        exemplar.answer.find(tmpl.tag_close(), open + tmpl.tag_open().size()) != std::string::npos;
    require(paired, ErrorCode::schema,
            "exemplar answer for '" + exemplar.quandary.id + "' has no complete paragraph tag pair");
}

std::vector<FewShotExemplar> load_exemplars(const std::filesystem::path& path)
{
    std::vector<FewShotExemplar> out;
    for (const auto& j : read_jsonl(path)) {
        FewShotExemplar e;
        e.quandary = parse_quandary(j.at("quandary"));
        e.principle = parse_principle(j.at("principle"));
        e.answer = j.at("answer").get<std::string>();
        out.push_back(std::move(e));
    }
    return out;
}

TemplateSet load_templates(const std::filesystem::path& dir)
{
    return {PromptTemplate::load(dir / "prompt1.v1.txt", 1), PromptTemplate::load(dir / "prompt_j.v1.txt", 2)};
}

std::string render_prompt1(std::span<const FewShotExemplar> exemplars, const Quandary& quandary,
                           const Principle& principle, const PromptTemplate& tmpl)
{
    require(exemplars.size() == 2, ErrorCode::invalid_argument,
            "the first prompt takes exactly two exemplars, got " + std::to_string(exemplars.size()));
    require(tmpl.step() == 1, ErrorCode::invalid_argument, "render_prompt1 needs a step-1 template");

    std::string prompt;
    for (const auto& e : exemplars) {
        validate_exemplar(e, tmpl);
        prompt += fill_block(tmpl, e.quandary, e.principle);
        prompt += e.answer;
        prompt += '\n';
        prompt += kExemplarDelimiter;
        prompt += "\n\n";
    }
    prompt += fill_block(tmpl, quandary, principle);
    return prompt;
}

std::string render_prompt_j(const std::string& prior_transcript, const Principle& principle,
                            const PromptTemplate& tmpl)
{
    require(tmpl.step() >= 2, ErrorCode::invalid_argument, "render_prompt_j needs a step-2 or step-3 template");
    require(!trim(prior_transcript).empty(), ErrorCode::precondition, "prior transcript is empty");
    const auto last_delim = prior_transcript.rfind(kExemplarDelimiter);
    const auto tail_start = last_delim == std::string::npos ? 0 : last_delim;
    require(prior_transcript.find(tmpl.tag_close(), tail_start) != std::string::npos, ErrorCode::precondition,
            "prior transcript holds no completed answer");
    return tmpl.body().render({{"prior", prior_transcript}, {"principle", principle.text}});
}

ParagraphParse strip_paragraph_tags(const std::string& raw, const std::string& tag_open, const std::string& tag_close)
{
    ParagraphParse out;
    auto push = [&](std::string text) {
        erase_all(text, tag_open);
        erase_all(text, tag_close);
        text = trim(text);
        if (!text.empty()) {
            out.paragraphs.push_back(std::move(text));
        }
    };
    std::size_t pos = 0;
    while (pos < raw.size()) {
        const auto open = raw.find(tag_open, pos);
        if (open == std::string::npos) {
            push(raw.substr(pos));
            break;
        }
        push(raw.substr(pos, open - pos));
        const auto body = open + tag_open.size();
        const auto close = raw.find(tag_close, body);
        if (close == std::string::npos) {
            out.unterminated = true;
            push(raw.substr(body));
            break;
        }
        push(raw.substr(body, close - body));
        pos = close + tag_close.size();
    }
    return out;
}

}  // namespace quandary
