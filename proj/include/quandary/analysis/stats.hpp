#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "quandary/analysis/annotation.hpp"

namespace quandary {

enum class Wtl { win, tie, loss };

/// Outcome → win/tie/loss, indexed by Outcome. The default counts the
/// system chosen alone as a win, the reference chosen alone as a loss, and
/// Both or None as ties.
using WtlMapping = std::array<Wtl, 4>;
inline constexpr WtlMapping kDefaultWtlMapping{Wtl::win, Wtl::loss, Wtl::tie, Wtl::tie};

struct Breakdown {
    std::size_t system_only = 0;
    std::size_t reference_only = 0;
    std::size_t both = 0;
    std::size_t none = 0;

    [[nodiscard]] std::size_t total() const noexcept { return system_only + reference_only + both + none; }
    void add(Outcome o) noexcept;
};

struct WinTieLoss {
    double win = 0.0;
    double tie = 0.0;
    double loss = 0.0;
};

/// Rates are percentages over every judgment, None included.
struct CriterionReport {
    Criterion criterion = Criterion::multi_perspective;
    std::string system;
    Breakdown breakdown;
    double success_rate_system = 0.0;
    double success_rate_reference = 0.0;
    WinTieLoss win_tie_loss;
};

Json to_json(const CriterionReport& r);

Breakdown tally(const std::vector<Judgment>& judgments);
CriterionReport make_criterion_report(Criterion criterion, const std::string& system, const Breakdown& b,
                                      const WtlMapping& mapping = kDefaultWtlMapping);

/// Success = system chosen alone + Both, over all judgments for the
/// criterion. Throws Error{empty_input} when no record has the criterion.
CriterionReport success_rate(const std::vector<AnnotationRecord>& records, Criterion criterion,
                             const std::string& system, const BlindingMap& blinding,
                             const WtlMapping& mapping = kDefaultWtlMapping);

struct Stratification {
    double mean = 0.0;
    double std = 0.0;
    double factor = 0.5;
    std::set<std::string> low;
    std::set<std::string> high;
};

/// Population mean and standard deviation; low = {score < μ - factor·σ},
/// high = {score > μ + factor·σ}. Throws Error{invalid_argument} for fewer
/// than two scores or a negative factor.
Stratification stratify(const std::map<std::string, double>& scores, double factor = 0.5);

struct StratumRate {
    std::size_t successes = 0;
    std::size_t total = 0;
    [[nodiscard]] double percent() const noexcept;
};

/// Success rate over the pairs whose quandary id lies in `stratum`.
/// Throws Error{empty_input} when no judgment falls in the stratum.
StratumRate criterion_rate_by_stratum(const std::set<std::string>& stratum,
                                      const std::vector<AnnotationRecord>& records, Criterion criterion,
                                      const std::string& system, const BlindingMap& blinding);

/// P(target success | condition success) for `system`, as a percentage.
/// Throws Error{empty_input} when the condition never succeeds.
double conditional_rate(const std::vector<AnnotationRecord>& records, Criterion condition, Criterion target,
                        const std::string& system, const BlindingMap& blinding);

/// Standard normal CDF by the Abramowitz-Stegun 26.2.17 rational
/// approximation (absolute error below 7.5e-8).
double normal_cdf(double z) noexcept;

enum class Alternative { two_sided, less, greater };

struct ProportionTest {
    double z = 0.0;
    double p_value = 1.0;
};

/// Pooled two-proportion z-test of k1/n1 against k2/n2. `less` tests
/// p1 < p2. A zero pooled variance gives z = 0 and p = 1.
ProportionTest two_proportion_test(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2,
                                   Alternative alternative = Alternative::two_sided);

}  // namespace quandary
