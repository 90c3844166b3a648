#include "quandary/corpus/types.hpp"

#include <cctype>

#include "quandary/common/error.hpp"

namespace quandary {

namespace {

const Json& field(const Json& j, const char* name)
{
    if (!j.is_object()) {
        fail(ErrorCode::schema, "record is not a JSON object");
    }
    auto it = j.find(name);
    if (it == j.end()) {
        fail(ErrorCode::schema, std::string("missing field '") + name + "'");
    }
    return *it;
}

std::string string_field(const Json& j, const char* name, bool non_empty = true)
{
    const Json& v = field(j, name);
    if (!v.is_string()) {
        fail(ErrorCode::schema, std::string("field '") + name + "' must be a string");
    }
    auto s = v.get<std::string>();
    if (non_empty && normalize_whitespace(s).empty()) {
        fail(ErrorCode::schema, std::string("field '") + name + "' must be non-empty");
    }
    return s;
}

std::string optional_string(const Json& j, const char* name)
{
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) {
        return {};
    }
    if (!it->is_string()) {
        fail(ErrorCode::schema, std::string("field '") + name + "' must be a string");
    }
    return it->get<std::string>();
}

}  // namespace

std::string Quandary::full_text() const
{
    std::string out;
    for (const auto& paragraph : context) {
        out += paragraph;
        out += ' ';
    }
    out += question;
    return out;
}

std::string_view to_string(Provenance p) noexcept
{
    switch (p) {
    case Provenance::retrieved: return "retrieved";
    case Provenance::generated: return "generated";
    case Provenance::handcrafted: return "handcrafted";
    case Provenance::human: return "human";
    }
    return "retrieved";
}

Provenance provenance_from_string(std::string_view s)
{
    if (s == "retrieved") return Provenance::retrieved;
    if (s == "generated") return Provenance::generated;
    if (s == "handcrafted") return Provenance::handcrafted;
    if (s == "human") return Provenance::human;
    fail(ErrorCode::schema, "unknown provenance '" + std::string(s) + "'");
}

std::string_view to_string(SplitName s) noexcept
{
    switch (s) {
    case SplitName::train: return "train";
    case SplitName::validation: return "validation";
    case SplitName::test: return "test";
    }
    return "train";
}

std::string normalize_whitespace(std::string_view text)
{
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)) != 0) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += c;
    }
    return out;
}

Json to_json(const Quandary& q)
{
    return Json{{"id", q.id}, {"context", q.context}, {"question", q.question}, {"source", q.source}};
}

Json to_json(const ReferenceAnswer& a)
{
    return Json{{"quandary_id", a.quandary_id}, {"text", a.text}, {"author", a.author}};
}

Json to_json(const Principle& p)
{
    return Json{{"id", p.id}, {"text", p.text}, {"provenance", to_string(p.provenance)}};
}

Json to_json(const CorpusStats& s)
{
    auto pair = [](const MeanStd& m) { return Json{{"mean", m.mean}, {"std", m.std}}; };
    return Json{{"sample_count", s.sample_count},
                {"words_per_quandary", pair(s.words_per_quandary)},
                {"sentences_per_quandary", pair(s.sentences_per_quandary)},
                {"words_per_answer", pair(s.words_per_answer)},
                {"sentences_per_answer", pair(s.sentences_per_answer)}};
}

Quandary parse_quandary(const Json& j)
{
    Quandary q;
    q.id = string_field(j, "id");
    const Json& context = field(j, "context");
    if (!context.is_array() || context.empty()) {
        fail(ErrorCode::schema, "field 'context' must be a non-empty array of strings");
    }
    for (const auto& paragraph : context) {
        if (!paragraph.is_string()) {
            fail(ErrorCode::schema, "field 'context' must contain only strings");
        }
        q.context.push_back(paragraph.get<std::string>());
    }
    q.question = string_field(j, "question");
    q.source = optional_string(j, "source");
    return q;
}

ReferenceAnswer parse_answer(const Json& j)
{
    ReferenceAnswer a;
    a.quandary_id = string_field(j, "quandary_id");
    a.text = string_field(j, "text");
    a.author = optional_string(j, "author");
    return a;
}

Principle parse_principle(const Json& j)
{
    Principle p;
    p.id = string_field(j, "id");
    p.text = string_field(j, "text");
    const Json& prov = field(j, "provenance");
    if (!prov.is_string()) {
        fail(ErrorCode::schema, "field 'provenance' must be a string");
    }
    p.provenance = provenance_from_string(prov.get<std::string>());
    return p;
}

std::vector<Principle> load_principles(const std::filesystem::path& path)
{
    std::vector<Principle> out;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (normalize_whitespace(line).empty()) {
            continue;
        }
        try {
            out.push_back(parse_principle(Json::parse(line)));
        } catch (const Json::parse_error& e) {
            fail(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            fail(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace quandary
