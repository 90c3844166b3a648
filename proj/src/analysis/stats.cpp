#include "quandary/analysis/stats.hpp"

#include <cmath>

#include "quandary/common/error.hpp"

namespace quandary {

namespace {

double percent(std::size_t k, std::size_t n) noexcept
{
    return n == 0 ? 0.0 : 100.0 * static_cast<double>(k) / static_cast<double>(n);
}

bool system_succeeds(Outcome o) noexcept
{
    return o == Outcome::system_only || o == Outcome::both;
}

}  // namespace

void Breakdown::add(Outcome o) noexcept
{
    switch (o) {
    case Outcome::system_only:
        ++system_only;
        break;
    case Outcome::reference_only:
        ++reference_only;
        break;
    case Outcome::both:
        ++both;
        break;
    case Outcome::none:
        ++none;
        break;
    }
}

Json to_json(const CriterionReport& r)
{
    return Json{{"criterion", to_string(r.criterion)},
                {"system", r.system},
                {"total", r.breakdown.total()},
                {"breakdown",
                 {{"system_only", r.breakdown.system_only},
                  {"reference_only", r.breakdown.reference_only},
                  {"both", r.breakdown.both},
                  {"none", r.breakdown.none}}},
                {"success_rate_system", r.success_rate_system},
                {"success_rate_reference", r.success_rate_reference},
                {"win_tie_loss", {{"win", r.win_tie_loss.win}, {"tie", r.win_tie_loss.tie}, {"loss", r.win_tie_loss.loss}}}};
}

Breakdown tally(const std::vector<Judgment>& judgments)
{
    Breakdown b;
    for (const auto& j : judgments) {
        b.add(j.outcome);
    }
    return b;
}

CriterionReport make_criterion_report(Criterion criterion, const std::string& system, const Breakdown& b,
                                      const WtlMapping& mapping)
{
    CriterionReport r;
    r.criterion = criterion;
    r.system = system;
    r.breakdown = b;
    const std::size_t n = b.total();
    r.success_rate_system = percent(b.system_only + b.both, n);
    r.success_rate_reference = percent(b.reference_only + b.both, n);
    std::array<std::size_t, 3> wtl{};
    const std::array<std::size_t, 4> counts{b.system_only, b.reference_only, b.both, b.none};
    for (std::size_t o = 0; o < counts.size(); ++o) {
        wtl[static_cast<std::size_t>(mapping[o])] += counts[o];
    }
    r.win_tie_loss = {percent(wtl[0], n), percent(wtl[1], n), percent(wtl[2], n)};
    return r;
}

CriterionReport success_rate(const std::vector<AnnotationRecord>& records, Criterion criterion,
                             const std::string& system, const BlindingMap& blinding, const WtlMapping& mapping)
{
    const auto judgments = aggregate(records, criterion, system, blinding);
    require(!judgments.empty(), ErrorCode::empty_input,
            "no annotations for criterion " + std::string(to_string(criterion)));
    return make_criterion_report(criterion, system, tally(judgments), mapping);
}

Stratification stratify(const std::map<std::string, double>& scores, double factor)
{
    require(scores.size() >= 2, ErrorCode::invalid_argument, "stratify needs at least two scores");
    require(factor >= 0.0 && std::isfinite(factor), ErrorCode::invalid_argument, "factor must be non-negative");
    Stratification s;
    s.factor = factor;
    double sum = 0.0;
    for (const auto& [id, v] : scores) {
        require(std::isfinite(v), ErrorCode::invalid_argument, "score for '" + id + "' is not finite");
        sum += v;
    }
    const double n = static_cast<double>(scores.size());
    s.mean = sum / n;
    double sq = 0.0;
    for (const auto& [id, v] : scores) {
        sq += (v - s.mean) * (v - s.mean);
    }
    s.std = std::sqrt(sq / n);
    const double lo = s.mean - factor * s.std;
    const double hi = s.mean + factor * s.std;
    for (const auto& [id, v] : scores) {
        if (v < lo) {
            s.low.insert(id);
        } else if (v > hi) {
            s.high.insert(id);
        }
    }
    return s;
}

double StratumRate::percent() const noexcept
{
    return quandary::percent(successes, total);
}

StratumRate criterion_rate_by_stratum(const std::set<std::string>& stratum,
                                      const std::vector<AnnotationRecord>& records, Criterion criterion,
                                      const std::string& system, const BlindingMap& blinding)
{
    require(!stratum.empty(), ErrorCode::empty_input, "stratum is empty");
    StratumRate rate;
    for (const auto& j : aggregate(records, criterion, system, blinding)) {
        if (stratum.contains(j.quandary_id)) {
            ++rate.total;
            rate.successes += system_succeeds(j.outcome) ? 1 : 0;
        }
    }
    require(rate.total > 0, ErrorCode::empty_input, "no judgments fall in the stratum");
    return rate;
}

double conditional_rate(const std::vector<AnnotationRecord>& records, Criterion condition, Criterion target,
                        const std::string& system, const BlindingMap& blinding)
{
    std::map<std::string, bool> target_success;
    for (const auto& j : aggregate(records, target, system, blinding)) {
        target_success[j.pair_id] = system_succeeds(j.outcome);
    }
    std::size_t conditioned = 0;
    std::size_t hits = 0;
    for (const auto& j : aggregate(records, condition, system, blinding)) {
        if (!system_succeeds(j.outcome)) {
            continue;
        }
        ++conditioned;
        if (auto it = target_success.find(j.pair_id); it != target_success.end() && it->second) {
            ++hits;
        }
    }
    require(conditioned > 0, ErrorCode::empty_input,
            "no pair succeeds on " + std::string(to_string(condition)));
    return percent(hits, conditioned);
}

namespace {

/// Upper tail P(Z > |z|) from the rational approximation.
double upper_tail(double z) noexcept
{
    constexpr double p = 0.2316419;
    constexpr double b1 = 0.319381530;
    constexpr double b2 = -0.356563782;
    constexpr double b3 = 1.781477937;
    constexpr double b4 = -1.821255978;
    constexpr double b5 = 1.330274429;
    const double x = std::fabs(z);
    const double t = 1.0 / (1.0 + p * x);
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    return pdf * t * (b1 + t * (b2 + t * (b3 + t * (b4 + t * b5))));
}

}  // namespace

double normal_cdf(double z) noexcept
{
    if (std::isnan(z)) {
        return z;
    }
    const double upper = upper_tail(z);
    return z >= 0.0 ? 1.0 - upper : upper;
}

ProportionTest two_proportion_test(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2,
                                   Alternative alternative)
{
    require(n1 >= 1 && n2 >= 1, ErrorCode::invalid_argument, "two_proportion_test needs n1, n2 >= 1");
    require(k1 <= n1 && k2 <= n2, ErrorCode::invalid_argument, "successes cannot exceed trials");
    const double dn1 = static_cast<double>(n1);
    const double dn2 = static_cast<double>(n2);
    const double p1 = static_cast<double>(k1) / dn1;
    const double p2 = static_cast<double>(k2) / dn2;
    const double pooled = static_cast<double>(k1 + k2) / (dn1 + dn2);
    const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / dn1 + 1.0 / dn2));
    ProportionTest out;
    if (se == 0.0) {
        return out;
    }
    out.z = (p1 - p2) / se;
    switch (alternative) {
    case Alternative::two_sided:
        out.p_value = std::min(1.0, 2.0 * upper_tail(out.z));
        break;
    case Alternative::less:
        out.p_value = normal_cdf(out.z);
        break;
    case Alternative::greater:
        out.p_value = 1.0 - normal_cdf(out.z);
        break;
    }
    return out;
}

}  // namespace quandary
