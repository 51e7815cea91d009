#include "bcas/budget.hpp"

#include "bcas/errors.hpp"

#include <limits>

namespace bcas {

namespace {

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b, bool& overflowed) {
    if (a > std::numeric_limits<std::uint64_t>::max() - b) {
        overflowed = true;
        return std::numeric_limits<std::uint64_t>::max();
    }
    return a + b;
}

} // namespace

void BudgetConfig::validate() const {
    if (max_total_tokens < 1) {
        throw ConfigError("budget: max_total_tokens must be >= 1");
    }
    if (max_searches.has_value() && *max_searches < 1) {
        throw ConfigError("budget: bounded max_searches must be >= 1");
    }
}

BudgetLedger::BudgetLedger(BudgetConfig config) : config_(config) {
    config_.validate();
}

void BudgetLedger::charge_turn(const TokenUsage& usage) {
    completion_tokens_used_ = saturating_add(completion_tokens_used_, usage.completion_tokens, overflowed_);
    prompt_tokens_used_ = saturating_add(prompt_tokens_used_, usage.prompt_tokens, overflowed_);
}

void BudgetLedger::charge_search() {
    if (!can_search()) {
        throw BudgetViolation("charge_search called with search budget exhausted");
    }
    ++searches_used_;
}

bool BudgetLedger::can_search() const {
    return !config_.max_searches.has_value() || searches_used_ < *config_.max_searches;
}

bool BudgetLedger::token_exhausted() const {
    return completion_tokens_used_ >= config_.max_total_tokens;
}

std::uint64_t BudgetLedger::remaining_tokens() const {
    if (completion_tokens_used_ >= config_.max_total_tokens) {
        return 0;
    }
    return config_.max_total_tokens - completion_tokens_used_;
}

std::optional<std::uint32_t> BudgetLedger::remaining_searches() const {
    if (!config_.max_searches.has_value()) {
        return std::nullopt;
    }
    return *config_.max_searches - searches_used_;
}

} // namespace bcas
