#include "quandary/scoring/selection.hpp"

#include <mutex>
#include <unordered_set>

#include "quandary/common/hash.hpp"

namespace quandary {

namespace {

Json dropped_json(const std::vector<DroppedCandidate>& dropped)
{
    Json out = Json::array();
    for (const auto& d : dropped) {
        out.push_back({{"principle", to_json(d.principle)}, {"reason", d.reason}});
    }
    return out;
}

Json scored_json(const std::vector<ScoredPrinciple>& items)
{
    Json out = Json::array();
    for (const auto& s : items) {
        out.push_back(to_json(s));
    }
    return out;
}

}  // namespace

std::string_view to_string(SelectionMode m) noexcept
{
    return m == SelectionMode::automatic ? "automatic" : "human";
}

Json to_json(const PrincipleSelection& s)
{
    Json principles = Json::array();
    for (const auto& p : s.principles) {
        principles.push_back(to_json(p));
    }
    return Json{{"quandary_id", s.quandary_id},
                {"principles", principles},
                {"mode", to_string(s.mode)},
                {"selected_by", s.selected_by ? Json(*s.selected_by) : Json(nullptr)},
                {"scorer_id", s.scorer_id},
                {"threshold", s.threshold},
                {"trace", scored_json(s.trace)},
                {"dropped", dropped_json(s.dropped)}};
}

PrincipleSelection parse_selection(const Json& j)
{
    PrincipleSelection s;
    s.quandary_id = j.at("quandary_id").get<std::string>();
    for (const auto& p : j.at("principles")) {
        s.principles.push_back(parse_principle(p));
    }
    const auto mode = j.value("mode", std::string("automatic"));
    require(mode == "automatic" || mode == "human", ErrorCode::schema, "unknown selection mode '" + mode + "'");
    s.mode = mode == "automatic" ? SelectionMode::automatic : SelectionMode::human;
    if (j.contains("selected_by") && j["selected_by"].is_string()) {
        s.selected_by = j["selected_by"].get<std::string>();
    }
    s.scorer_id = j.value("scorer_id", std::string{});
    s.threshold = j.value("threshold", 0.0);
    if (j.contains("trace")) {
        for (const auto& t : j["trace"]) {
            s.trace.push_back(parse_scored_principle(t));
        }
    }
    if (j.contains("dropped")) {
        for (const auto& d : j["dropped"]) {
            s.dropped.push_back({parse_principle(d.at("principle")), d.at("reason").get<std::string>()});
        }
    }
    require(!s.principles.empty() && s.principles.size() <= kMaxPrinciples, ErrorCode::schema,
            "a selection holds between 1 and 3 principles");
    require(s.mode == SelectionMode::automatic || s.selected_by.has_value(), ErrorCode::schema,
            "human selections require selected_by");
    return s;
}

Json to_json(const RankedPool& p)
{
    return Json{{"scorer_id", p.scorer_id},
                {"polarity", to_string(p.polarity)},
                {"threshold", p.threshold},
                {"ranked", scored_json(p.ranked)},
                {"considered", scored_json(p.considered)},
                {"dropped", dropped_json(p.dropped)}};
}

RankedPool rank_pool(const Quandary& quandary, const std::vector<Principle>& pool, Scorer& scorer,
                     const SelectionOptions& options)
{
    const ScorerConfig& config = scorer.config();
    auto scores = score_pool(scorer, quandary, pool);

    RankedPool out;
    out.scorer_id = config.scorer_id;
    out.polarity = config.polarity;
    out.threshold = config.threshold;
    out.considered = std::move(scores.scored);
    sort_ranked(out.considered);
    out.dropped = std::move(scores.dropped);
    out.ranked = dedup(filter_by_threshold(out.considered, config), options.jaccard_cutoff);
    return out;
}

struct PendingSelection::State {
    std::mutex mutex;
    std::optional<PrincipleSelection> result;
};

PendingSelection::PendingSelection(std::string token, std::string quandary_id, RankedPool pool,
                                   Clock::time_point created, std::chrono::seconds ttl)
    : token_(std::move(token)), quandary_id_(std::move(quandary_id)), pool_(std::move(pool)), created_(created),
      ttl_(ttl), state_(std::make_shared<State>())
{}

std::optional<PrincipleSelection> PendingSelection::finalized() const
{
    std::lock_guard lock(state_->mutex);
    return state_->result;
}

bool PendingSelection::try_finalize(const PrincipleSelection& selection) const
{
    std::lock_guard lock(state_->mutex);
    if (state_->result) {
        return false;
    }
    state_->result = selection;
    return true;
}

std::string make_pending_token(const std::string& quandary_id, const ScorerConfig& config, std::size_t top_k)
{
    std::string key = quandary_id;
    key += '\x1f';
    key += config.scorer_id;
    key += '\x1f';
    key += Json(config.threshold).dump();
    key += '\x1f';
    key += std::to_string(top_k);
    return "pend-" + to_hex(hash_with_seed(key, 0x5e1ec7));
}

SelectionResult select_principles(const Quandary& quandary, const std::vector<Principle>& pool, Scorer& scorer,
                                  SelectionMode mode, const SelectionOptions& options, std::chrono::seconds ttl,
                                  PendingSelection::Clock::time_point now)
{
    RankedPool ranked = rank_pool(quandary, pool, scorer, options);
    if (mode == SelectionMode::human) {
        auto token = make_pending_token(quandary.id, scorer.config(), pool.size());
        return PendingSelection(std::move(token), quandary.id, std::move(ranked), now, ttl);
    }
    if (ranked.ranked.empty()) {
        fail(ErrorCode::no_candidates,
             "no principle for '" + quandary.id + "' passed threshold " + Json(ranked.threshold).dump() +
                 " of scorer '" + ranked.scorer_id + "'; relax the threshold or select principles manually");
    }
    PrincipleSelection s;
    s.quandary_id = quandary.id;
    s.mode = SelectionMode::automatic;
    const std::size_t take = std::min(options.max_principles, ranked.ranked.size());
    for (std::size_t i = 0; i < take; ++i) {
        s.principles.push_back(ranked.ranked[i].principle);
    }
    s.trace = std::move(ranked.considered);
    s.dropped = std::move(ranked.dropped);
    s.scorer_id = ranked.scorer_id;
    s.threshold = ranked.threshold;
    return s;
}

PrincipleSelection confirm_selection(const PendingSelection& pending, const std::vector<PrincipleChoice>& choices,
                                     const std::string& annotator, PendingSelection::Clock::time_point now,
                                     double jaccard_cutoff)
{
    require(!choices.empty(), ErrorCode::invalid_argument, "choose at least one principle");
    require(choices.size() <= kMaxPrinciples, ErrorCode::invalid_argument, "choose at most three principles");
    require(!annotator.empty(), ErrorCode::invalid_argument, "a human selection requires an annotator id");
    require(now < pending.expires_at(), ErrorCode::expired, "pending selection '" + pending.token() + "' has expired");

    const RankedPool& pool = pending.pool();
    auto lookup = [&](const std::string& id) -> const Principle* {
        for (const auto& s : pool.considered) {
            if (s.principle.id == id) {
                return &s.principle;
            }
        }
        for (const auto& d : pool.dropped) {
            if (d.principle.id == id) {
                return &d.principle;
            }
        }
        return nullptr;
    };

    PrincipleSelection s;
    s.quandary_id = pending.quandary_id();
    s.mode = SelectionMode::human;
    s.selected_by = annotator;
    s.scorer_id = pool.scorer_id;
    s.threshold = pool.threshold;
    s.trace = pool.considered;
    s.dropped = pool.dropped;

    std::unordered_set<std::string> ids;
    for (const auto& choice : choices) {
        Principle chosen;
        if (const Principle* found = choice.id.empty() ? nullptr : lookup(choice.id)) {
            chosen = *found;
        } else if (choice.text && !normalize_whitespace(*choice.text).empty()) {
            chosen.text = *choice.text;
            chosen.provenance = Provenance::human;
            chosen.id = choice.id.empty() ? "human-" + to_hex(fnv1a64(*choice.text), 12) : choice.id;
        } else {
            fail(ErrorCode::invalid_argument,
                 choice.id.empty() ? "a free-text choice needs text" : "unknown principle id '" + choice.id + "'");
        }
        require(ids.insert(chosen.id).second, ErrorCode::invalid_argument,
                "principle '" + chosen.id + "' chosen twice");
        for (const auto& earlier : s.principles) {
            require(!near_duplicate(earlier, chosen, jaccard_cutoff), ErrorCode::invalid_argument,
                    "principles '" + earlier.id + "' and '" + chosen.id + "' are near-duplicates");
        }
        s.principles.push_back(std::move(chosen));
    }

    require(pending.try_finalize(s), ErrorCode::conflict,
            "pending selection '" + pending.token() + "' was already finalized");
    return s;
}

}  // namespace quandary
