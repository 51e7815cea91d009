#include "bcas/grading.hpp"

#include "bcas/errors.hpp"
#include "bcas/prompts.hpp"
#include "bcas/strings.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace bcas {

namespace {

/// CORRECT / INCORRECT as standalone words; npos-based scan keeps it cheap.
struct LabelScan {
    std::size_t correct = 0;
    std::size_t incorrect = 0;
};

bool word_boundary(const std::string& text, std::size_t begin, std::size_t len) {
    const auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    if (begin > 0 && is_word(text[begin - 1])) {
        return false;
    }
    const std::size_t end = begin + len;
    if (end < text.size() && is_word(text[end])) {
        return false;
    }
    return true;
}

LabelScan scan_labels(const std::string& text) {
    LabelScan scan;
    // INCORRECT contains CORRECT as a substring; count INCORRECT first and
    // only count CORRECT occurrences that stand alone.
    for (std::size_t pos = text.find("INCORRECT"); pos != std::string::npos;
         pos = text.find("INCORRECT", pos + 1)) {
        if (word_boundary(text, pos, 9)) {
            ++scan.incorrect;
        }
    }
    for (std::size_t pos = text.find("CORRECT"); pos != std::string::npos;
         pos = text.find("CORRECT", pos + 1)) {
        if (word_boundary(text, pos, 7)) {
            ++scan.correct;
        }
    }
    return scan;
}

std::optional<bool> parse_label(const std::string& text) {
    const std::string trimmed = trim(text);
    if (trimmed == "CORRECT") {
        return true;
    }
    if (trimmed == "INCORRECT") {
        return false;
    }
    const LabelScan scan = scan_labels(text);
    if (scan.correct > 0 && scan.incorrect == 0) {
        return true;
    }
    if (scan.incorrect > 0 && scan.correct == 0) {
        return false;
    }
    return std::nullopt;
}

} // namespace

GradeResult judge(const std::string& question, const std::string& reference_answer,
                  const std::string& model_answer, ModelBackend& backend) {
    if (question.empty() || reference_answer.empty() || model_answer.empty()) {
        throw DomainError("judge: question, reference and answer must be non-empty");
    }
    const std::string prompt = render_template(prompt_template("judge/v1"),
                                               {
                                                   {"question", question},
                                                   {"reference", reference_answer},
                                                   {"answer", model_answer},
                                               });
    ModelRequest request{prompt, 16, 0.0};
    for (int attempt = 0; attempt < 2; ++attempt) {
        const ModelResponse response = backend.complete(request);
        const auto label = parse_label(response.text);
        if (label.has_value()) {
            Verdict verdict;
            verdict.correct = *label;
            verdict.judge_id = backend.id();
            const std::string trimmed = trim(response.text);
            if (trimmed != "CORRECT" && trimmed != "INCORRECT") {
                verdict.rationale = trimmed;
            }
            return GradeResult{verdict};
        }
        request.prompt =
            prompt + "\n\nYour previous reply was not a valid label. Reply with exactly one "
                     "word: CORRECT or INCORRECT.";
    }
    return GradeResult{std::nullopt};
}

std::string normalize_answer(std::string_view text) {
    std::string lowered;
    lowered.reserve(text.size());
    for (const char ch : text) {
        const auto byte = static_cast<unsigned char>(ch);
        if (std::isalnum(byte) || byte >= 0x80) {
            lowered.push_back(byte < 0x80 ? static_cast<char>(std::tolower(byte)) : ch);
        } else {
            lowered.push_back(' ');
        }
    }
    std::istringstream words(lowered);
    std::string word;
    std::string out;
    while (words >> word) {
        if (word == "a" || word == "an" || word == "the") {
            continue;
        }
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += word;
    }
    return out;
}

Verdict exact_match(const std::string& reference_answer, const std::string& model_answer) {
    const std::string reference = normalize_answer(reference_answer);
    const std::string answer = normalize_answer(model_answer);
    Verdict verdict;
    verdict.judge_id = "exact_match";
    if (reference.empty()) {
        verdict.correct = answer.empty();
        return verdict;
    }
    if (answer == reference) {
        verdict.correct = true;
        return verdict;
    }
    // Token-boundary containment: " paris " inside " the answer is paris ".
    const std::string padded_answer = " " + answer + " ";
    const std::string padded_reference = " " + reference + " ";
    verdict.correct = padded_answer.find(padded_reference) != std::string::npos;
    return verdict;
}

} // namespace bcas
