#pragma once

#include <map>
#include <string>
#include <vector>

#include "quandary/analysis/stats.hpp"

namespace quandary {

/// One row per criterion.
struct EvaluationSummary {
    std::string system;
    std::vector<CriterionReport> criteria;
};

EvaluationSummary summarize(const std::vector<AnnotationRecord>& records, const std::string& system,
                            const BlindingMap& blinding, const WtlMapping& mapping = kDefaultWtlMapping);

Json to_json(const EvaluationSummary& s);

/// Breakdown percentages, success rates and win/tie/loss per criterion.
std::string format_summary_table(const EvaluationSummary& s);

struct StratumRow {
    Criterion criterion = Criterion::multi_perspective;
    StratumRate low;
    StratumRate high;
    ProportionTest test;
};

struct StratifiedReport {
    std::string metric;
    Stratification strata;
    std::vector<StratumRow> rows;
};

/// Splits `scores` (quandary id → metric value) into low/high strata and
/// compares each criterion's success rate between them. Criteria with no
/// judgments in a stratum are omitted.
StratifiedReport stratified_report(const std::string& metric, const std::map<std::string, double>& scores,
                                   const std::vector<AnnotationRecord>& records, const std::string& system,
                                   const BlindingMap& blinding, double factor = 0.5,
                                   Alternative alternative = Alternative::two_sided);

Json to_json(const StratifiedReport& r);

/// Low and high success percentages and the p-value per criterion.
std::string format_stratified_table(const std::vector<StratifiedReport>& reports);

}  // namespace quandary
