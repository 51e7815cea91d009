#pragma once

#include "bcas/backend.hpp"

#include <optional>
#include <string>

namespace bcas {

struct Verdict {
    bool correct = false;
    std::string judge_id;
    std::optional<std::string> rationale;
};

/// nullopt verdict means ungraded: the judge never produced a usable label.
/// Ungraded samples leave both the numerator and denominator of accuracy.
struct GradeResult {
    std::optional<Verdict> verdict;
};

/// Prompts the judge backend with the constrained rubric and parses the
/// CORRECT/INCORRECT label, re-prompting once on unparseable output. The
/// judge backend may (and by default should) differ from the answering one.
GradeResult judge(const std::string& question, const std::string& reference_answer,
                  const std::string& model_answer, ModelBackend& backend);

/// Deterministic offline grader: normalized equality or token-boundary
/// containment of the reference inside the answer. CI convenience only;
/// never a substitute for the judge in reported accuracy.
Verdict exact_match(const std::string& reference_answer, const std::string& model_answer);

/// Lowercase, articles and punctuation stripped, whitespace collapsed.
std::string normalize_answer(std::string_view text);

} // namespace bcas
