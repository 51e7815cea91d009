#include "bcas/budget.hpp"
#include "bcas/errors.hpp"

#include <doctest.h>

#include <limits>
#include <random>

using namespace bcas;

TEST_CASE("charge_turn accumulates completion and prompt tokens") {
    BudgetLedger ledger(BudgetConfig{4, 16000});
    ledger.charge_turn(TokenUsage{50, 120});
    CHECK(ledger.completion_tokens_used() == 120);
    CHECK(ledger.prompt_tokens_used() == 50);
    CHECK_FALSE(ledger.token_exhausted());
    CHECK(ledger.searches_used() == 0);
}

TEST_CASE("token threshold is reached at >= max_total_tokens") {
    BudgetLedger ledger(BudgetConfig{std::nullopt, 16000});
    ledger.charge_turn(TokenUsage{0, 15000});
    CHECK_FALSE(ledger.token_exhausted());
    ledger.charge_turn(TokenUsage{0, 1500});
    CHECK(ledger.completion_tokens_used() == 16500);
    CHECK(ledger.token_exhausted());

    SUBCASE("boundary: exactly at the threshold counts as exhausted") {
        BudgetLedger exact(BudgetConfig{std::nullopt, 16000});
        exact.charge_turn(TokenUsage{0, 16000});
        CHECK(exact.token_exhausted());
        exact.charge_turn(TokenUsage{0, 0});
        CHECK(exact.token_exhausted());
    }
    SUBCASE("one below the threshold is not exhausted") {
        BudgetLedger below(BudgetConfig{std::nullopt, 16000});
        below.charge_turn(TokenUsage{0, 15999});
        CHECK_FALSE(below.token_exhausted());
    }
    SUBCASE("overshoot past a small limit still reads as exhausted") {
        BudgetLedger small(BudgetConfig{std::nullopt, 500});
        small.charge_turn(TokenUsage{0, 612});
        CHECK(small.token_exhausted());
        CHECK(small.remaining_tokens() == 0);
    }
}

TEST_CASE("charge_search enforces the hard cap") {
    BudgetLedger ledger(BudgetConfig{4, 16000});
    ledger.charge_search();
    CHECK(ledger.searches_used() == 1);
    CHECK(ledger.remaining_searches() == 3);

    SUBCASE("charging past the cap is an engine bug and throws") {
        BudgetLedger one(BudgetConfig{1, 16000});
        one.charge_search();
        CHECK_FALSE(one.can_search());
        CHECK_THROWS_AS(one.charge_search(), BudgetViolation);
        CHECK(one.searches_used() == 1);
    }
    SUBCASE("unlimited never exhausts") {
        BudgetLedger unlimited(BudgetConfig{std::nullopt, 16000});
        for (int i = 0; i < 10000; ++i) {
            unlimited.charge_search();
        }
        CHECK(unlimited.searches_used() == 10000);
        CHECK(unlimited.can_search());
        unlimited.charge_search();
        CHECK(unlimited.searches_used() == 10001);
        CHECK(unlimited.remaining_searches() == std::nullopt);
    }
}

TEST_CASE("can_search tracks the remaining allowance") {
    BudgetLedger ledger(BudgetConfig{3, 16000});
    ledger.charge_search();
    ledger.charge_search();
    CHECK(ledger.can_search());
    ledger.charge_search();
    CHECK_FALSE(ledger.can_search());

    BudgetLedger unlimited(BudgetConfig{std::nullopt, 16000});
    for (int i = 0; i < 999; ++i) {
        unlimited.charge_search();
    }
    CHECK(unlimited.can_search());
}

TEST_CASE("config invariants are validated") {
    CHECK_THROWS_AS(BudgetLedger(BudgetConfig{4, 0}), ConfigError);
    CHECK_THROWS_AS(BudgetLedger(BudgetConfig{0, 16000}), ConfigError);
    CHECK_NOTHROW(BudgetLedger(BudgetConfig{1, 1}));
    CHECK_NOTHROW(BudgetLedger(BudgetConfig{std::nullopt, 1}));
}

TEST_CASE("token accounting saturates on overflow and flags it") {
    BudgetLedger ledger(BudgetConfig{std::nullopt, 16000});
    ledger.charge_turn(TokenUsage{0, std::numeric_limits<std::uint64_t>::max()});
    ledger.charge_turn(TokenUsage{0, 1000});
    CHECK(ledger.completion_tokens_used() == std::numeric_limits<std::uint64_t>::max());
    CHECK(ledger.overflowed());
    CHECK(ledger.token_exhausted());
}

TEST_CASE("counters are monotonic and equal the sum of charges") {
    std::mt19937_64 rng(11);
    for (int run = 0; run < 50; ++run) {
        const std::uint32_t cap = 1 + static_cast<std::uint32_t>(rng() % 5);
        BudgetLedger ledger(BudgetConfig{cap, 100000});
        std::uint64_t expected_completion = 0;
        std::uint64_t expected_prompt = 0;
        std::uint64_t prev_completion = 0;
        std::uint32_t prev_searches = 0;
        for (int step = 0; step < 40; ++step) {
            if (rng() % 2 == 0) {
                const TokenUsage usage{rng() % 500, rng() % 500};
                ledger.charge_turn(usage);
                expected_completion += usage.completion_tokens;
                expected_prompt += usage.prompt_tokens;
            } else if (ledger.can_search()) {
                ledger.charge_search();
            }
            CHECK(ledger.completion_tokens_used() >= prev_completion);
            CHECK(ledger.searches_used() >= prev_searches);
            CHECK(ledger.searches_used() <= cap);
            prev_completion = ledger.completion_tokens_used();
            prev_searches = ledger.searches_used();
        }
        CHECK(ledger.completion_tokens_used() == expected_completion);
        CHECK(ledger.prompt_tokens_used() == expected_prompt);
    }
}
