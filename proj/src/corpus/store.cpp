#include "quandary/corpus/store.hpp"

#include <algorithm>

#include "quandary/common/error.hpp"

namespace quandary {

IngestResult ingest(const std::filesystem::path& path, IngestFormat format)
{
    require(format == IngestFormat::jsonl, ErrorCode::invalid_argument, "unsupported ingest format");

    IngestResult result;
    auto& report = result.report;
    struct PendingAnswer {
        std::size_t line;
        ReferenceAnswer answer;
    };
    std::vector<PendingAnswer> answers;

    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (normalize_whitespace(line).empty()) {
            continue;
        }
        try {
            const Json j = Json::parse(line);
            if (!j.is_object()) {
                fail(ErrorCode::schema, "record is not a JSON object");
            }
            if (j.contains("context")) {
                Quandary q = parse_quandary(j);
                std::optional<ReferenceAnswer> embedded;
                if (auto it = j.find("answer"); it != j.end() && !it->is_null()) {
                    Json a = *it;
                    if (!a.is_object()) {
                        fail(ErrorCode::schema, "field 'answer' must be an object");
                    }
                    a["quandary_id"] = q.id;
                    embedded = parse_answer(a);
                }
                const std::string id = q.id;
                if (!result.corpus.quandaries.insert(std::move(q))) {
                    report.rejections.push_back({line_no, "duplicate id '" + id + "'"});
                    continue;
                }
                ++report.accepted_quandaries;
                if (embedded) {
                    answers.push_back({line_no, std::move(*embedded)});
                }
            } else if (j.contains("quandary_id")) {
                answers.push_back({line_no, parse_answer(j)});
            } else {
                // Report against the quandary schema, the primary record type.
                fail(ErrorCode::schema, "missing field 'context'");
            }
        } catch (const Json::parse_error& e) {
            report.rejections.push_back({line_no, std::string("malformed JSON: ") + e.what()});
        } catch (const Error& e) {
            report.rejections.push_back({line_no, e.what()});
        }
    }

    for (auto& pending : answers) {
        const std::string id = pending.answer.quandary_id;
        if (!result.corpus.quandaries.contains(id)) {
            report.rejections.push_back({pending.line, "answer references unknown quandary '" + id + "'"});
        } else if (!result.corpus.answers.insert(std::move(pending.answer))) {
            report.rejections.push_back({pending.line, "duplicate answer for quandary '" + id + "'"});
        } else {
            ++report.accepted_answers;
        }
    }
    std::stable_sort(report.rejections.begin(), report.rejections.end(),
                     [](const Rejection& a, const Rejection& b) { return a.line < b.line; });
    return result;
}

void export_corpus(const std::filesystem::path& path, const Corpus& corpus)
{
    std::vector<Json> records;
    for (const auto& q : corpus.quandaries.all()) {
        records.push_back(to_json(q));
    }
    for (const auto& a : corpus.answers.all()) {
        records.push_back(to_json(a));
    }
    write_jsonl_atomic(path, records);
}

Json to_json(const IngestReport& report)
{
    Json rejections = Json::array();
    for (const auto& r : report.rejections) {
        rejections.push_back({{"line", r.line}, {"reason", r.reason}});
    }
    return Json{{"accepted_quandaries", report.accepted_quandaries},
                {"accepted_answers", report.accepted_answers},
                {"rejections", rejections}};
}

}  // namespace quandary
