#pragma once

#include "bcas/backend.hpp"
#include "bcas/budget.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bcas {

inline constexpr std::string_view kSearchTool = "search_database";
inline constexpr std::string_view kAnswerTool = "ready_to_answer";

struct ToolSpec {
    std::string name;
    std::string description;                // plain language, no provider schema
    std::vector<std::string> arguments;     // named string parameters
};

struct ToolCall {
    std::string tool;
    std::map<std::string, std::string> args;
};

struct FinalAnswer {
    std::string answer;
};

using Action = std::variant<ToolCall, FinalAnswer>;

struct ParsedAction {
    std::string thought;
    Action action;
};

/// Extracts the thought and the first well-formed action block from model
/// output. Tolerates surrounding prose. Throws MalformedAction when no valid
/// block is present.
ParsedAction parse_action(const std::string& model_output);

enum class TurnKind { Action, Reflection };

struct Turn {
    TurnKind kind = TurnKind::Action;
    std::string thought;
    std::optional<Action> action;           // unset for reflection notes
    std::string observation;
    TokenUsage usage;
};

struct Answered {
    std::string answer;
};
struct BudgetExhausted {
    std::string answer;                     // best-effort forced answer
};
struct Failed {
    std::string reason;
};
using Outcome = std::variant<Answered, BudgetExhausted, Failed>;

std::string outcome_tag(const Outcome& outcome);     // answered | budget_exhausted | failed
std::string outcome_answer(const Outcome& outcome);  // empty for Failed

/// Backend calls by kind; action turns = total - plan - reflection - forced - reprompt.
struct CallCounts {
    std::uint32_t total = 0;
    std::uint32_t plan = 0;
    std::uint32_t reflection = 0;
    std::uint32_t forced = 0;
    std::uint32_t reprompt = 0;
};

struct TrajectoryState {
    std::string question;
    std::optional<std::string> plan;
    std::vector<Turn> turns;
    BudgetLedger ledger;
    std::optional<Outcome> outcome;
    /// Answered via ready_to_answer before any budget was exhausted.
    bool early_stop = false;
    CallCounts calls;
    /// Usage of every backend call in order, for telemetry reconciliation.
    std::vector<TokenUsage> call_usages;
    /// Transport retries summed over all backend calls.
    std::uint32_t backend_retries = 0;

    bool terminal() const { return outcome.has_value(); }
    std::size_t action_turns() const;
};

struct EngineConfig {
    BudgetConfig budget;
    bool preplan_enabled = false;
    bool reflection_enabled = false;
    std::uint32_t reflection_interval = 2;   // tool-using turns between reflections
    std::uint32_t max_turns = 25;            // safety bound, matters for unlimited searches
    std::string prompt_template_id = "agent/v1";
    /// Completion cap for the forced-answer turn after exhaustion.
    std::uint64_t forced_answer_token_cap = 512;

    void validate() const;
};

/// Retrieval entry point the engine depends on. Bound to one collection and
/// search mode; must be safe to call from concurrent trajectories.
class SearchService {
public:
    virtual ~SearchService() = default;
    /// Runs a search and formats the observation text shown to the model.
    virtual std::string search(const std::string& query) = 0;
};

/// The two built-in tools; the registry is extensible but ships with these.
std::vector<ToolSpec> default_tool_registry();

/// Registry filtered by the ledger: search_database is present iff the search
/// budget allows another call; ready_to_answer is always present.
std::vector<ToolSpec> available_tools(const BudgetLedger& ledger,
                                      const std::vector<ToolSpec>& registry);

/// Renders the shared agent prompt: question, plan, full history, tool
/// descriptions, and the literal remaining allowances.
std::string render_prompt(const TrajectoryState& state, const std::vector<ToolSpec>& tools,
                          std::string_view template_id = "agent/v1");

/// Stateful execution loop: reason, select tool, execute, update budget.
/// One engine instance runs one trajectory at a time.
class TrajectoryEngine {
public:
    TrajectoryEngine(EngineConfig config, ModelBackend& backend, SearchService& searcher);

    TrajectoryState run(const std::string& question);

private:
    ModelResponse call(TrajectoryState& state, const ModelRequest& request);
    void preplan(TrajectoryState& state);
    void reflect(TrajectoryState& state);
    void force_answer(TrajectoryState& state);

    EngineConfig config_;
    ModelBackend& backend_;
    SearchService& searcher_;
    std::vector<ToolSpec> registry_;
};

} // namespace bcas
