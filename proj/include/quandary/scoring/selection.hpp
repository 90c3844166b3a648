#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "quandary/scoring/scorer.hpp"

namespace quandary {

inline constexpr std::size_t kMaxPrinciples = 3;

enum class SelectionMode { automatic, human };

std::string_view to_string(SelectionMode m) noexcept;

/// Up to three principles that condition one generated answer.
struct PrincipleSelection {
    std::string quandary_id;
    std::vector<Principle> principles;
    SelectionMode mode = SelectionMode::automatic;
    std::optional<std::string> selected_by;
    /// Every candidate that received a score, in ranked order.
    std::vector<ScoredPrinciple> trace;
    std::vector<DroppedCandidate> dropped;
    std::string scorer_id;
    double threshold = 0.0;
};

Json to_json(const PrincipleSelection& s);
PrincipleSelection parse_selection(const Json& j);

/// Scored, filtered, deduplicated view of a candidate pool.
struct RankedPool {
    /// Survivors of threshold + dedup, best first (ties by id).
    std::vector<ScoredPrinciple> ranked;
    /// All scored candidates, best first.
    std::vector<ScoredPrinciple> considered;
    std::vector<DroppedCandidate> dropped;
    std::string scorer_id;
    Polarity polarity = Polarity::higher_better;
    double threshold = 0.0;
};

Json to_json(const RankedPool& p);

struct SelectionOptions {
    std::size_t max_principles = kMaxPrinciples;
    double jaccard_cutoff = kDedupJaccard;
};

RankedPool rank_pool(const Quandary& quandary, const std::vector<Principle>& pool, Scorer& scorer,
                     const SelectionOptions& options = {});

/// A ranked pool waiting for a human decision. Copies share state, so the
/// first successful confirm_selection on any copy wins.
class PendingSelection {
  public:
    using Clock = std::chrono::system_clock;

    PendingSelection(std::string token, std::string quandary_id, RankedPool pool, Clock::time_point created,
                     std::chrono::seconds ttl);

    [[nodiscard]] const std::string& token() const noexcept { return token_; }
    [[nodiscard]] const std::string& quandary_id() const noexcept { return quandary_id_; }
    [[nodiscard]] const RankedPool& pool() const noexcept { return pool_; }
    [[nodiscard]] Clock::time_point created() const noexcept { return created_; }
    [[nodiscard]] Clock::time_point expires_at() const noexcept { return created_ + ttl_; }
    [[nodiscard]] std::chrono::seconds ttl() const noexcept { return ttl_; }
    [[nodiscard]] std::optional<PrincipleSelection> finalized() const;

    /// Atomically stores `selection` unless already finalized; returns false
    /// if another confirm got there first.
    bool try_finalize(const PrincipleSelection& selection) const;

  private:
    struct State;

    std::string token_;
    std::string quandary_id_;
    RankedPool pool_;
    Clock::time_point created_;
    std::chrono::seconds ttl_;
    std::shared_ptr<State> state_;
};

inline constexpr std::chrono::hours kPendingTtl{24};

using SelectionResult = std::variant<PrincipleSelection, PendingSelection>;

/// Automatic mode returns the best min(3, |ranked|) survivors and throws
/// Error{no_candidates} when none survive. Human mode returns a
/// PendingSelection over the ranked pool, even when it is empty, since the
/// reviewer may enter principles of their own.
SelectionResult select_principles(const Quandary& quandary, const std::vector<Principle>& pool, Scorer& scorer,
                                  SelectionMode mode, const SelectionOptions& options = {},
                                  std::chrono::seconds ttl = kPendingTtl,
                                  PendingSelection::Clock::time_point now = PendingSelection::Clock::now());

/// Deterministic pending token for a (quandary, scorer settings) pair.
std::string make_pending_token(const std::string& quandary_id, const ScorerConfig& config, std::size_t top_k);

/// A reviewer's pick: an id from the pending pool, or free text that becomes
/// a new human-provenance principle (id optional).
struct PrincipleChoice {
    std::string id;
    std::optional<std::string> text;
};

/// Finalizes a human selection. Throws Error{invalid_argument} for 0 or more
/// than 3 choices, unknown ids without text, repeated ids, or choices that
/// are near-duplicates of each other; Error{expired} past the TTL;
/// Error{conflict} when the pending selection was already finalized.
PrincipleSelection confirm_selection(const PendingSelection& pending, const std::vector<PrincipleChoice>& choices,
                                     const std::string& annotator,
                                     PendingSelection::Clock::time_point now = PendingSelection::Clock::now(),
                                     double jaccard_cutoff = kDedupJaccard);

}  // namespace quandary
