#include "bcas/prompts.hpp"

#include "bcas/errors.hpp"

namespace bcas {

namespace {

// One template per step kind, shared verbatim across every model backend.
// Tools are described in plain language inside {tools}; no provider-native
// function-call schema appears anywhere.

constexpr std::string_view kAgentV1 =
    R"(You are a research assistant. Answer the question below by searching a document database and reasoning over what you find.

Question: {question}
{plan}
Remaining budget: {searches_remaining} searches, {tokens_remaining} completion tokens.

Available tools:
{tools}

Respond with a short thought about your progress, then exactly one action block in this form:

<<ACTION>>
tool: <tool name>
arg.<parameter>: <value>
<<END>>

To finish, call ready_to_answer with arg.answer set to your final answer.

Progress so far:
{history})";

constexpr std::string_view kForcedAnswerV1 =
    R"(Your budget is exhausted. Using only the information already gathered below, give your best final answer to the question. Reply with the answer text only.

Question: {question}
{plan}
Progress so far:
{history})";

constexpr std::string_view kPreplanV1 =
    R"(You are a research assistant preparing to answer a question with a document search tool.

Question: {question}

Budget: {searches_remaining} searches, {tokens_remaining} completion tokens.

Write a short step-by-step research plan for answering the question, considering the available search and token budgets. Reply with the plan only.)";

constexpr std::string_view kReflectV1 =
    R"(You are partway through answering a question with a document search tool.

Question: {question}
{plan}
Remaining budget: {searches_remaining} searches, {tokens_remaining} completion tokens.

Progress so far:
{history}

Review the progress above. Note what has been learned, whether the current search path is productive, and what to do next to stay within budget. Reply with the note only.)";

constexpr std::string_view kFormatReminderV1 =
    R"(Your previous reply did not contain a valid action block. Respond again with a short thought and exactly one action block:

<<ACTION>>
tool: <tool name>
arg.<parameter>: <value>
<<END>>

Available tools:
{tools})";

constexpr std::string_view kJudgeV1 =
    R"(You are grading a question-answering system. Decide whether the candidate answer is correct with respect to the reference answer. Judge factual equivalence only: accept rewordings, extra context, and formatting differences; reject answers that name a different entity, value, or fact.

Question: {question}
Reference answer: {reference}
Candidate answer: {answer}

Reply with exactly one word: CORRECT or INCORRECT.)";

} // namespace

std::string_view prompt_template(std::string_view id) {
    if (id == "agent/v1") return kAgentV1;
    if (id == "forced_answer/v1") return kForcedAnswerV1;
    if (id == "preplan/v1") return kPreplanV1;
    if (id == "reflect/v1") return kReflectV1;
    if (id == "format_reminder/v1") return kFormatReminderV1;
    if (id == "judge/v1") return kJudgeV1;
    throw UnknownTemplate("unknown prompt template: " + std::string(id));
}

std::string render_template(std::string_view tpl,
                            const std::map<std::string, std::string, std::less<>>& values) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        const std::size_t open = tpl.find('{', pos);
        if (open == std::string_view::npos) {
            out.append(tpl.substr(pos));
            break;
        }
        const std::size_t close = tpl.find('}', open);
        if (close == std::string_view::npos) {
            out.append(tpl.substr(pos));
            break;
        }
        out.append(tpl.substr(pos, open - pos));
        const std::string_view key = tpl.substr(open + 1, close - open - 1);
        if (auto it = values.find(key); it != values.end()) {
            out.append(it->second);
        } else {
            out.append(tpl.substr(open, close - open + 1));
        }
        pos = close + 1;
    }
    return out;
}

} // namespace bcas
