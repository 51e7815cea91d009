#include "bcas/engine.hpp"

#include "bcas/errors.hpp"
#include "bcas/prompts.hpp"
#include "bcas/strings.hpp"

#include <algorithm>
#include <sstream>

namespace bcas {

// ---------------------------------------------------------------------------
// Action parsing

namespace {

constexpr std::string_view kBlockOpen = "<<ACTION>>";
constexpr std::string_view kBlockClose = "<<END>>";

struct BlockParse {
    ToolCall call;
    std::size_t end_line = 0;   // index one past <<END>>
    bool ok = false;
};

BlockParse parse_block(const std::vector<std::string_view>& lines, std::size_t open_line) {
    BlockParse out;
    bool have_tool = false;
    bool closed = false;
    std::size_t i = open_line + 1;
    for (; i < lines.size(); ++i) {
        const std::string_view line = trim_view(lines[i]);
        if (line.empty()) {
            continue;
        }
        if (line == kBlockClose) {
            closed = true;
            ++i;
            break;
        }
        if (starts_with(line, "tool:")) {
            if (have_tool) {
                return out;   // two tool lines in one block
            }
            out.call.tool = trim(line.substr(5));
            have_tool = true;
            continue;
        }
        if (starts_with(line, "arg.")) {
            const std::size_t colon = line.find(':', 4);
            if (colon == std::string_view::npos) {
                return out;
            }
            const std::string key = trim(line.substr(4, colon - 4));
            if (key.empty()) {
                return out;
            }
            out.call.args[key] = trim(line.substr(colon + 1));
            continue;
        }
        return out;   // stray content inside the block
    }
    if (!closed || !have_tool || out.call.tool.empty()) {
        return out;
    }
    out.end_line = i;
    out.ok = true;
    return out;
}

} // namespace

ParsedAction parse_action(const std::string& model_output) {
    const auto lines = split_lines(model_output);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim_view(lines[i]) != kBlockOpen) {
            continue;
        }
        BlockParse block = parse_block(lines, i);
        if (!block.ok) {
            continue;
        }
        ParsedAction parsed;
        std::string thought;
        for (std::size_t j = 0; j < i; ++j) {
            thought.append(lines[j]);
            thought.push_back('\n');
        }
        parsed.thought = trim(thought);
        if (block.call.tool == kAnswerTool) {
            auto it = block.call.args.find("answer");
            if (it == block.call.args.end()) {
                continue;   // ready_to_answer without arg.answer is not a valid block
            }
            parsed.action = FinalAnswer{it->second};
        } else {
            parsed.action = std::move(block.call);
        }
        return parsed;
    }
    throw MalformedAction("no valid action block in model output");
}

// ---------------------------------------------------------------------------
// State helpers

std::size_t TrajectoryState::action_turns() const {
    return static_cast<std::size_t>(
        std::count_if(turns.begin(), turns.end(),
                      [](const Turn& t) { return t.kind == TurnKind::Action; }));
}

std::string outcome_tag(const Outcome& outcome) {
    return std::visit(
        [](const auto& o) -> std::string {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, Answered>) return "answered";
            if constexpr (std::is_same_v<T, BudgetExhausted>) return "budget_exhausted";
            if constexpr (std::is_same_v<T, Failed>) return "failed";
        },
        outcome);
}

std::string outcome_answer(const Outcome& outcome) {
    return std::visit(
        [](const auto& o) -> std::string {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, Failed>) {
                return "";
            } else {
                return o.answer;
            }
        },
        outcome);
}

void EngineConfig::validate() const {
    budget.validate();
    if (reflection_interval < 1) {
        throw ConfigError("engine: reflection_interval must be >= 1");
    }
    if (max_turns < 1) {
        throw ConfigError("engine: max_turns must be >= 1");
    }
}

// ---------------------------------------------------------------------------
// Tools and prompt rendering

std::vector<ToolSpec> default_tool_registry() {
    return {
        ToolSpec{std::string(kSearchTool),
                 "Search the document database. Give a focused query; the tool returns up to "
                 "five numbered passages with their source document ids.",
                 {"query"}},
        ToolSpec{std::string(kAnswerTool),
                 "Finish the task and give your final answer to the question.",
                 {"answer"}},
    };
}

std::vector<ToolSpec> available_tools(const BudgetLedger& ledger,
                                      const std::vector<ToolSpec>& registry) {
    const bool has_answer = std::any_of(registry.begin(), registry.end(),
                                        [](const ToolSpec& t) { return t.name == kAnswerTool; });
    if (!has_answer) {
        throw ConfigError("tool registry must contain ready_to_answer");
    }
    std::vector<ToolSpec> tools;
    tools.reserve(registry.size());
    for (const ToolSpec& tool : registry) {
        if (tool.name == kSearchTool && !ledger.can_search()) {
            continue;
        }
        tools.push_back(tool);
    }
    return tools;
}

namespace {

std::string describe_tools(const std::vector<ToolSpec>& tools) {
    std::string out;
    for (const ToolSpec& tool : tools) {
        out += "- " + tool.name;
        if (!tool.arguments.empty()) {
            out += " (arguments:";
            for (const std::string& arg : tool.arguments) {
                out += " " + arg;
            }
            out += ")";
        }
        out += ": " + tool.description + "\n";
    }
    return out;
}

std::string format_action(const Action& action) {
    return std::visit(
        [](const auto& a) -> std::string {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, FinalAnswer>) {
                return std::string(kAnswerTool) + "(answer: " + a.answer + ")";
            } else {
                std::string out = a.tool + "(";
                bool first = true;
                for (const auto& [key, value] : a.args) {
                    if (!first) out += ", ";
                    out += key + ": " + value;
                    first = false;
                }
                return out + ")";
            }
        },
        action);
}

std::string format_history(const TrajectoryState& state) {
    if (state.turns.empty()) {
        return "(no steps yet)\n";
    }
    std::string out;
    std::size_t step = 0;
    for (const Turn& turn : state.turns) {
        if (turn.kind == TurnKind::Reflection) {
            out += "Reflection: " + turn.thought + "\n\n";
            continue;
        }
        ++step;
        out += "Step " + std::to_string(step) + ":\n";
        if (!turn.thought.empty()) {
            out += "Thought: " + turn.thought + "\n";
        }
        if (turn.action.has_value()) {
            out += "Action: " + format_action(*turn.action) + "\n";
        }
        out += "Observation: " + (turn.observation.empty() ? "(none)" : turn.observation) + "\n\n";
    }
    return out;
}

std::string searches_remaining_text(const BudgetLedger& ledger) {
    const auto remaining = ledger.remaining_searches();
    return remaining.has_value() ? std::to_string(*remaining) : "unlimited";
}

std::string plan_section(const TrajectoryState& state) {
    if (!state.plan.has_value() || state.plan->empty()) {
        return "";
    }
    return "\nPlan:\n" + *state.plan + "\n";
}

} // namespace

std::string render_prompt(const TrajectoryState& state, const std::vector<ToolSpec>& tools,
                          std::string_view template_id) {
    return render_template(prompt_template(template_id),
                           {
                               {"question", state.question},
                               {"plan", plan_section(state)},
                               {"history", format_history(state)},
                               {"tools", describe_tools(tools)},
                               {"searches_remaining", searches_remaining_text(state.ledger)},
                               {"tokens_remaining", std::to_string(state.ledger.remaining_tokens())},
                           });
}

// ---------------------------------------------------------------------------
// TrajectoryEngine

TrajectoryEngine::TrajectoryEngine(EngineConfig config, ModelBackend& backend,
                                   SearchService& searcher)
    : config_(std::move(config)), backend_(backend), searcher_(searcher),
      registry_(default_tool_registry()) {
    config_.validate();
}

ModelResponse TrajectoryEngine::call(TrajectoryState& state, const ModelRequest& request) {
    ModelResponse response = backend_.complete(request);
    state.ledger.charge_turn(response.usage);
    ++state.calls.total;
    state.call_usages.push_back(response.usage);
    state.backend_retries += response.retries;
    return response;
}

void TrajectoryEngine::preplan(TrajectoryState& state) {
    const std::string prompt = render_template(
        prompt_template("preplan/v1"),
        {
            {"question", state.question},
            {"searches_remaining", searches_remaining_text(state.ledger)},
            {"tokens_remaining", std::to_string(state.ledger.remaining_tokens())},
        });
    ++state.calls.plan;
    ModelRequest request{prompt, std::max<std::uint64_t>(1, state.ledger.remaining_tokens())};
    state.plan = trim(call(state, request).text);
}

void TrajectoryEngine::reflect(TrajectoryState& state) {
    const std::string prompt = render_template(
        prompt_template("reflect/v1"),
        {
            {"question", state.question},
            {"plan", plan_section(state)},
            {"history", format_history(state)},
            {"searches_remaining", searches_remaining_text(state.ledger)},
            {"tokens_remaining", std::to_string(state.ledger.remaining_tokens())},
        });
    ++state.calls.reflection;
    ModelRequest request{prompt, std::max<std::uint64_t>(1, state.ledger.remaining_tokens())};
    ModelResponse response = call(state, request);
    Turn note;
    note.kind = TurnKind::Reflection;
    note.thought = trim(response.text);
    note.usage = response.usage;
    state.turns.push_back(std::move(note));
}

void TrajectoryEngine::force_answer(TrajectoryState& state) {
    const std::string prompt = render_template(prompt_template("forced_answer/v1"),
                                               {
                                                   {"question", state.question},
                                                   {"plan", plan_section(state)},
                                                   {"history", format_history(state)},
                                               });
    ++state.calls.forced;
    ModelRequest request{prompt, config_.forced_answer_token_cap};
    ModelResponse response = call(state, request);

    // Best effort: honor a ready_to_answer block if present, otherwise take
    // the whole reply. Tool calls in the reply are never executed here.
    std::string answer = trim(response.text);
    try {
        ParsedAction parsed = parse_action(response.text);
        if (const auto* final = std::get_if<FinalAnswer>(&parsed.action)) {
            answer = final->answer;
        }
    } catch (const MalformedAction&) {
    }
    state.outcome = BudgetExhausted{answer};
}

TrajectoryState TrajectoryEngine::run(const std::string& question) {
    TrajectoryState state;
    state.question = question;
    state.ledger = BudgetLedger(config_.budget);

    try {
        if (config_.preplan_enabled) {
            preplan(state);
            if (state.ledger.token_exhausted()) {
                force_answer(state);
            }
        }

        while (!state.terminal()) {
            if (state.action_turns() >= config_.max_turns) {
                force_answer(state);
                break;
            }

            const auto tools = available_tools(state.ledger, registry_);
            const std::string prompt = render_prompt(state, tools, config_.prompt_template_id);
            ModelResponse response =
                call(state, ModelRequest{prompt,
                                         std::max<std::uint64_t>(1, state.ledger.remaining_tokens())});

            std::optional<ParsedAction> parsed;
            try {
                parsed = parse_action(response.text);
            } catch (const MalformedAction&) {
            }
            if (!parsed.has_value()) {
                const std::string reminder = render_template(
                    prompt_template("format_reminder/v1"), {{"tools", describe_tools(tools)}});
                ++state.calls.reprompt;
                response = call(
                    state, ModelRequest{prompt + "\n\n" + reminder,
                                        std::max<std::uint64_t>(1, state.ledger.remaining_tokens())});
                try {
                    parsed = parse_action(response.text);
                } catch (const MalformedAction&) {
                }
                if (!parsed.has_value()) {
                    state.outcome = Failed{"unparseable"};
                    break;
                }
            }

            Turn turn;
            turn.thought = parsed->thought;
            turn.action = parsed->action;
            turn.usage = response.usage;

            if (const auto* final = std::get_if<FinalAnswer>(&parsed->action)) {
                state.turns.push_back(std::move(turn));
                state.early_stop = state.ledger.can_search() && !state.ledger.token_exhausted();
                state.outcome = Answered{final->answer};
                break;
            }

            const ToolCall& tool_call = std::get<ToolCall>(parsed->action);
            if (tool_call.tool == kSearchTool) {
                const auto query_it = tool_call.args.find("query");
                if (query_it == tool_call.args.end() || trim_view(query_it->second).empty()) {
                    turn.observation = "search_database requires arg.query.";
                    state.turns.push_back(std::move(turn));
                } else if (state.ledger.can_search()) {
                    state.ledger.charge_search();
                    try {
                        turn.observation = searcher_.search(query_it->second);
                    } catch (const Error& e) {
                        turn.observation = std::string("search failed: ") + e.what();
                        state.turns.push_back(std::move(turn));
                        state.outcome = Failed{std::string("search: ") + e.what()};
                        break;
                    }
                    state.turns.push_back(std::move(turn));
                } else {
                    // The tool was not offered; the model asked anyway. Answer
                    // with what has been gathered.
                    turn.observation =
                        "search_database is not available: the search budget is exhausted.";
                    state.turns.push_back(std::move(turn));
                    force_answer(state);
                    break;
                }
            } else {
                turn.observation = "Unknown tool '" + tool_call.tool +
                                   "'. Available tools:\n" + describe_tools(tools);
                state.turns.push_back(std::move(turn));
            }

            if (state.terminal()) {
                break;
            }
            if (state.ledger.token_exhausted()) {
                force_answer(state);
                break;
            }
            if (config_.reflection_enabled &&
                state.action_turns() % config_.reflection_interval == 0) {
                reflect(state);
                if (state.ledger.token_exhausted()) {
                    force_answer(state);
                    break;
                }
            }
        }
    } catch (const BackendUnavailable& e) {
        state.outcome = Failed{std::string("backend: ") + e.what()};
    }
    return state;
}

} // namespace bcas
