#include "quandary/analysis/annotation.hpp"

#include <map>
#include <set>
#include <tuple>

#include "quandary/common/error.hpp"

namespace quandary {

std::string_view to_string(Criterion c) noexcept
{
    switch (c) {
    case Criterion::multi_perspective:
        return "multi_perspective";
    case Criterion::coherence:
        return "coherence";
    case Criterion::justification:
        return "justification";
    }
    return "unknown";
}

std::string_view to_string(Choice c) noexcept
{
    switch (c) {
    case Choice::A:
        return "A";
    case Choice::B:
        return "B";
    case Choice::Both:
        return "Both";
    case Choice::None:
        return "None";
    }
    return "unknown";
}

std::string_view to_string(Outcome o) noexcept
{
    switch (o) {
    case Outcome::system_only:
        return "system_only";
    case Outcome::reference_only:
        return "reference_only";
    case Outcome::both:
        return "both";
    case Outcome::none:
        return "none";
    }
    return "unknown";
}

Criterion criterion_from_string(std::string_view s)
{
    for (auto c : kCriteria) {
        if (to_string(c) == s) {
            return c;
        }
    }
    fail(ErrorCode::schema, "unknown criterion '" + std::string(s) + "'");
}

Choice choice_from_string(std::string_view s)
{
    for (auto c : {Choice::A, Choice::B, Choice::Both, Choice::None}) {
        if (to_string(c) == s) {
            return c;
        }
    }
    fail(ErrorCode::schema, "choice must be one of A, B, Both, None (got '" + std::string(s) + "')");
}

std::string_view criterion_question(Criterion c) noexcept
{
    switch (c) {
    case Criterion::multi_perspective:
        return "Which of the answers is addressing the ethical dilemma from multiple perspectives?";
    case Criterion::coherence:
        return "Which answer is more coherent?";
    case Criterion::justification:
        return "Which answer includes sound reasoning for its stances?";
    }
    return "";
}

Json to_json(const AnnotationRecord& r)
{
    return Json{{"pair_id", r.pair_id},
                {"annotator", r.annotator},
                {"criterion", to_string(r.criterion)},
                {"choice", to_string(r.choice)}};
}

AnnotationRecord parse_annotation(const Json& j)
{
    AnnotationRecord r;
    for (const char* field : {"pair_id", "annotator", "criterion", "choice"}) {
        require(j.contains(field) && j[field].is_string(), ErrorCode::schema,
                std::string("annotation record: missing field '") + field + "'");
    }
    r.pair_id = j["pair_id"].get<std::string>();
    r.annotator = j["annotator"].get<std::string>();
    r.criterion = criterion_from_string(j["criterion"].get<std::string>());
    r.choice = choice_from_string(j["choice"].get<std::string>());
    return r;
}

void check_unique_keys(const std::vector<AnnotationRecord>& records)
{
    std::set<std::tuple<std::string, std::string, Criterion>> seen;
    for (const auto& r : records) {
        require(seen.emplace(r.pair_id, r.annotator, r.criterion).second, ErrorCode::conflict,
                "duplicate annotation for pair '" + r.pair_id + "', annotator '" + r.annotator + "', criterion " +
                    std::string(to_string(r.criterion)));
    }
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path)
{
    std::vector<AnnotationRecord> out;
    for (const auto& j : read_jsonl(path)) {
        out.push_back(parse_annotation(j));
    }
    check_unique_keys(out);
    return out;
}

Outcome deblind(Choice choice, const BlindedPair& pair, const std::string& system)
{
    require(system == pair.label_a || system == pair.label_b, ErrorCode::invalid_argument,
            "system '" + system + "' is not part of pair '" + pair.pair_id + "'");
    const bool system_is_a = system == pair.label_a;
    switch (choice) {
    case Choice::A:
        return system_is_a ? Outcome::system_only : Outcome::reference_only;
    case Choice::B:
        return system_is_a ? Outcome::reference_only : Outcome::system_only;
    case Choice::Both:
        return Outcome::both;
    case Choice::None:
        return Outcome::none;
    }
    return Outcome::none;
}

std::vector<Judgment> aggregate(const std::vector<AnnotationRecord>& records, Criterion criterion,
                                const std::string& system, const BlindingMap& blinding)
{
    check_unique_keys(records);
    std::map<std::string, std::array<std::size_t, 4>> tallies;
    std::vector<std::string> order;
    for (const auto& r : records) {
        if (r.criterion != criterion) {
            continue;
        }
        require(blinding.contains(r.pair_id), ErrorCode::not_found,
                "pair '" + r.pair_id + "' is missing from the blinding map");
        auto [it, inserted] = tallies.try_emplace(r.pair_id);
        if (inserted) {
            it->second.fill(0);
            order.push_back(r.pair_id);
        }
        ++it->second[static_cast<std::size_t>(r.choice)];
    }

    std::vector<Judgment> out;
    out.reserve(order.size());
    for (const auto& id : order) {
        const auto& t = tallies.at(id);
        std::size_t best = 0;
        std::size_t best_count = 0;
        bool tied = false;
        std::size_t votes = 0;
        for (std::size_t c = 0; c < t.size(); ++c) {
            votes += t[c];
            if (t[c] > best_count) {
                best = c;
                best_count = t[c];
                tied = false;
            } else if (t[c] == best_count && best_count > 0) {
                tied = true;
            }
        }
        const Choice choice = tied ? Choice::None : static_cast<Choice>(best);
        const auto& pair = blinding.at(id);
        out.push_back({id, pair.quandary_id, criterion, deblind(choice, pair, system), votes});
    }
    return out;
}

}  // namespace quandary
