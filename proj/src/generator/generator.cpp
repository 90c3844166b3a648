#include "quandary/generator/generator.hpp"

#include "quandary/common/log.hpp"

namespace quandary {

std::string wrap_disclaimer(const std::string& text)
{
    require(text.find_first_not_of(" \t\r\n") != std::string::npos, ErrorCode::precondition,
            "cannot wrap an empty answer");
    std::string out = kDisclaimer;
    out += "\n\n";
    out += text;
    out += "\n\n";
    out += kDisclaimer;
    return out;
}

Json to_json(const GeneratedAnswer& a)
{
    Json segments = Json::array();
    for (const auto& s : a.segments) {
        segments.push_back({{"index", s.index},
                            {"principle_id", s.principle_id},
                            {"text", s.text},
                            {"raw", s.raw},
                            {"finish_reason", to_string(s.finish_reason)}});
    }
    Json trace = Json::array();
    for (const auto& t : a.trace) {
        trace.push_back({{"step", t.step},
                         {"prompt", t.prompt},
                         {"raw", t.raw},
                         {"finish_reason", to_string(t.finish_reason)},
                         {"backend_id", t.backend_id},
                         {"attempts", t.attempts},
                         {"unterminated_paragraph", t.unterminated_paragraph}});
    }
    return Json{{"quandary_id", a.quandary_id},
                {"selection", to_json(a.selection)},
                {"segments", segments},
                {"concatenated", a.concatenated},
                {"disclaimer_wrapped", a.disclaimer_wrapped},
                {"trace", trace},
                {"complete", a.complete},
                {"error", a.error ? Json(*a.error) : Json(nullptr)}};
}

GeneratedAnswer parse_generated_answer(const Json& j)
{
    GeneratedAnswer a;
    a.quandary_id = j.at("quandary_id").get<std::string>();
    a.selection = parse_selection(j.at("selection"));
    for (const auto& s : j.at("segments")) {
        a.segments.push_back({s.at("index").get<int>(), s.at("principle_id").get<std::string>(),
                              s.at("text").get<std::string>(), s.value("raw", std::string{}),
                              finish_reason_from_string(s.value("finish_reason", std::string("backend_stop")))});
    }
    a.concatenated = j.at("concatenated").get<std::string>();
    a.disclaimer_wrapped = j.value("disclaimer_wrapped", std::string{});
    if (j.contains("trace")) {
        for (const auto& t : j["trace"]) {
            a.trace.push_back({t.at("step").get<int>(), t.at("prompt").get<std::string>(),
                               t.at("raw").get<std::string>(),
                               finish_reason_from_string(t.value("finish_reason", std::string("backend_stop"))),
                               t.value("backend_id", std::string{}), t.value("attempts", 1),
                               t.value("unterminated_paragraph", false)});
        }
    }
    a.complete = j.value("complete", true);
    if (j.contains("error") && j["error"].is_string()) {
        a.error = j["error"].get<std::string>();
    }
    return a;
}

GeneratedAnswer generate_answer(const Quandary& quandary, const PrincipleSelection& selection,
                                CompletionClient& client, const TemplateSet& templates,
                                std::span<const FewShotExemplar> exemplars, const GenerationOptions& options)
{
    require(selection.quandary_id == quandary.id, ErrorCode::invalid_argument,
            "selection belongs to '" + selection.quandary_id + "', not '" + quandary.id + "'");
    require(!selection.principles.empty() && selection.principles.size() <= kMaxPrinciples,
            ErrorCode::precondition, "a finalized selection of 1 to 3 principles is required");

    GeneratedAnswer answer;
    answer.quandary_id = quandary.id;
    answer.selection = selection;

    std::string transcript;
    for (std::size_t k = 0; k < selection.principles.size(); ++k) {
        const Principle& principle = selection.principles[k];
        const std::string prompt = k == 0 ? render_prompt1(exemplars, quandary, principle, templates.first)
                                          : render_prompt_j(transcript, principle, templates.next);
        CompletionRequest request;
        request.prompt = prompt;
        request.max_tokens = options.max_tokens;
        request.temperature = options.temperature;
        request.stop_sequences = {kExemplarDelimiter};
        request.seed = options.seed;

        CompletionResponse response;
        try {
            response = client.complete(request);
        } catch (const Error& e) {
            answer.complete = false;
            answer.error = "step " + std::to_string(k + 1) + ": " + e.what();
            throw GenerationError(e.code(), *answer.error, answer);
        }

        const auto parsed = strip_paragraph_tags(response.text, templates.first.tag_open(),
                                                 templates.first.tag_close());
        if (parsed.unterminated) {
            log(LogLevel::info, "step " + std::to_string(k + 1) + " for '" + quandary.id +
                                    "' ended inside an open paragraph tag");
        }
        answer.trace.push_back({static_cast<int>(k + 1), prompt, response.text, response.finish_reason,
                                response.backend_id, response.attempts, parsed.unterminated});

        std::string text;
        for (const auto& p : parsed.paragraphs) {
            text += text.empty() ? "" : "\n\n";
            text += p;
        }
        if (text.empty()) {
            answer.complete = false;
            answer.error = "step " + std::to_string(k + 1) + ": segment is empty after tag stripping";
            throw GenerationError(ErrorCode::backend, *answer.error, answer);
        }
        answer.segments.push_back({static_cast<int>(k + 1), principle.id, std::move(text), response.text,
                                   response.finish_reason});
        transcript = prompt + response.text;
    }

    for (const auto& s : answer.segments) {
        answer.concatenated += answer.concatenated.empty() ? "" : "\n\n";
        answer.concatenated += s.text;
    }
    answer.disclaimer_wrapped = wrap_disclaimer(answer.concatenated);
    return answer;
}

}  // namespace quandary
