#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "quandary/analysis/blinding.hpp"
#include "quandary/common/error.hpp"

namespace quandary {

enum class Criterion { multi_perspective, coherence, justification };
enum class Choice { A, B, Both, None };

inline constexpr std::array<Criterion, 3> kCriteria{Criterion::multi_perspective, Criterion::coherence,
                                                    Criterion::justification};

std::string_view to_string(Criterion c) noexcept;
std::string_view to_string(Choice c) noexcept;
Criterion criterion_from_string(std::string_view s);
Choice choice_from_string(std::string_view s);

/// The question put to annotators for each criterion.
std::string_view criterion_question(Criterion c) noexcept;

struct AnnotationRecord {
    std::string pair_id;
    std::string annotator;
    Criterion criterion = Criterion::multi_perspective;
    Choice choice = Choice::None;

    bool operator==(const AnnotationRecord&) const = default;
};

Json to_json(const AnnotationRecord& r);
AnnotationRecord parse_annotation(const Json& j);

/// Reads a JSONL export. A repeated (pair_id, annotator, criterion) key
/// throws Error{conflict}.
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);
void check_unique_keys(const std::vector<AnnotationRecord>& records);

/// A choice seen from one system's side.
enum class Outcome { system_only, reference_only, both, none };

std::string_view to_string(Outcome o) noexcept;

/// Resolves a blinded choice for `system`, which must hold label A or B.
Outcome deblind(Choice choice, const BlindedPair& pair, const std::string& system);

struct Judgment {
    std::string pair_id;
    std::string quandary_id;
    Criterion criterion = Criterion::multi_perspective;
    Outcome outcome = Outcome::none;
    std::size_t votes = 0;
};

/// One judgment per (pair, criterion): the most frequent choice among its
/// annotators, with Both and None as distinct outcomes. A tie for first
/// place resolves to None. Throws Error{not_found} for a pair missing from
/// the blinding map and Error{conflict} for duplicate record keys.
std::vector<Judgment> aggregate(const std::vector<AnnotationRecord>& records, Criterion criterion,
                                const std::string& system, const BlindingMap& blinding);

}  // namespace quandary
