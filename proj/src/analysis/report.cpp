#include "quandary/analysis/report.hpp"

#include <fmt/format.h>

#include "quandary/common/error.hpp"

namespace quandary {

EvaluationSummary summarize(const std::vector<AnnotationRecord>& records, const std::string& system,
                            const BlindingMap& blinding, const WtlMapping& mapping)
{
    EvaluationSummary s;
    s.system = system;
    for (auto c : kCriteria) {
        s.criteria.push_back(success_rate(records, c, system, blinding, mapping));
    }
    return s;
}

Json to_json(const EvaluationSummary& s)
{
    Json rows = Json::array();
    for (const auto& c : s.criteria) {
        rows.push_back(to_json(c));
    }
    return Json{{"system", s.system}, {"criteria", rows}};
}

std::string format_summary_table(const EvaluationSummary& s)
{
    std::string out = fmt::format("{:<18} {:>6} {:>12} {:>8} {:>14} {:>8} {:>10} {:>12} {:>22}\n", "criterion", "n",
                                  "system_only", "both", "reference_only", "none", "success", "ref_success",
                                  "win/tie/loss");
    for (const auto& c : s.criteria) {
        const double n = static_cast<double>(c.breakdown.total());
        auto pct = [n](std::size_t k) { return 100.0 * static_cast<double>(k) / n; };
        out += fmt::format("{:<18} {:>6} {:>12.2f} {:>8.2f} {:>14.2f} {:>8.2f} {:>10.2f} {:>12.2f} {:>22}\n",
                           to_string(c.criterion), c.breakdown.total(), pct(c.breakdown.system_only),
                           pct(c.breakdown.both), pct(c.breakdown.reference_only), pct(c.breakdown.none),
                           c.success_rate_system, c.success_rate_reference,
                           fmt::format("{:.2f}/{:.2f}/{:.2f}", c.win_tie_loss.win, c.win_tie_loss.tie,
                                       c.win_tie_loss.loss));
    }
    return out;
}

StratifiedReport stratified_report(const std::string& metric, const std::map<std::string, double>& scores,
                                   const std::vector<AnnotationRecord>& records, const std::string& system,
                                   const BlindingMap& blinding, double factor, Alternative alternative)
{
    StratifiedReport r;
    r.metric = metric;
    r.strata = stratify(scores, factor);
    if (r.strata.low.empty() || r.strata.high.empty()) {
        return r;
    }
    for (auto c : kCriteria) {
        StratumRow row;
        row.criterion = c;
        try {
            row.low = criterion_rate_by_stratum(r.strata.low, records, c, system, blinding);
            row.high = criterion_rate_by_stratum(r.strata.high, records, c, system, blinding);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::empty_input) {
                throw;
            }
            continue;
        }
        row.test = two_proportion_test(row.low.successes, row.low.total, row.high.successes, row.high.total,
                                       alternative);
        r.rows.push_back(row);
    }
    return r;
}

Json to_json(const StratifiedReport& r)
{
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"criterion", to_string(row.criterion)},
                        {"low", {{"successes", row.low.successes}, {"total", row.low.total}, {"rate", row.low.percent()}}},
                        {"high", {{"successes", row.high.successes}, {"total", row.high.total}, {"rate", row.high.percent()}}},
                        {"z", row.test.z},
                        {"p_value", row.test.p_value}});
    }
    return Json{{"metric", r.metric},
                {"mean", r.strata.mean},
                {"std", r.strata.std},
                {"factor", r.strata.factor},
                {"low_ids", r.strata.low},
                {"high_ids", r.strata.high},
                {"rows", rows}};
}

std::string format_stratified_table(const std::vector<StratifiedReport>& reports)
{
    std::string out = fmt::format("{:<12} {:<18} {:>14} {:>14} {:>10}\n", "metric", "criterion", "low", "high",
                                  "p-value");
    for (const auto& r : reports) {
        for (const auto& row : r.rows) {
            out += fmt::format("{:<12} {:<18} {:>14} {:>14} {:>10.4f}\n", r.metric, to_string(row.criterion),
                               fmt::format("{:.2f} ({}/{})", row.low.percent(), row.low.successes, row.low.total),
                               fmt::format("{:.2f} ({}/{})", row.high.percent(), row.high.successes, row.high.total),
                               row.test.p_value);
        }
    }
    return out;
}

}  // namespace quandary
