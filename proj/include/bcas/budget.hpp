#pragma once

#include <cstdint>
#include <optional>

namespace bcas {

struct TokenUsage {
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;

    bool operator==(const TokenUsage&) const = default;
};

/// The two trajectory budget levers. max_searches unset means unlimited;
/// telemetry keeps the distinction (an unlimited run is not a large cap).
struct BudgetConfig {
    std::optional<std::uint32_t> max_searches;
    std::uint64_t max_total_tokens = 16000;

    void validate() const;

    bool unlimited_searches() const { return !max_searches.has_value(); }
};

/// Tracks search calls and cumulative token usage for exactly one trajectory.
/// The search cap is pre-paid and hard; the token cap is checked post-turn,
/// so a single turn may overshoot it.
class BudgetLedger {
public:
    BudgetLedger() = default;
    explicit BudgetLedger(BudgetConfig config);

    /// Adds a turn's provider-reported usage. Saturates on overflow and sets
    /// the overflow flag instead of failing.
    void charge_turn(const TokenUsage& usage);

    /// Consumes one search. Throws BudgetViolation when can_search() is false;
    /// that signals an engine bug, never user input.
    void charge_search();

    bool can_search() const;
    bool token_exhausted() const;

    /// Completion tokens left before the threshold; 0 once exhausted.
    std::uint64_t remaining_tokens() const;
    /// Searches left, or nullopt for unlimited.
    std::optional<std::uint32_t> remaining_searches() const;

    const BudgetConfig& config() const { return config_; }
    std::uint32_t searches_used() const { return searches_used_; }
    std::uint64_t completion_tokens_used() const { return completion_tokens_used_; }
    std::uint64_t prompt_tokens_used() const { return prompt_tokens_used_; }
    bool overflowed() const { return overflowed_; }

private:
    BudgetConfig config_;
    std::uint32_t searches_used_ = 0;
    std::uint64_t completion_tokens_used_ = 0;
    std::uint64_t prompt_tokens_used_ = 0;
    bool overflowed_ = false;
};

} // namespace bcas
