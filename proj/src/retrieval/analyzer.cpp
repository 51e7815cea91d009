#include "bcas/retrieval/analyzer.hpp"

#include "bcas/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace bcas::retrieval {

std::vector<std::string> analyze(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (const char ch : text) {
        const auto byte = static_cast<unsigned char>(ch);
        if (byte >= 0x80 || std::isalnum(byte)) {
            current.push_back(byte < 0x80 ? static_cast<char>(std::tolower(byte)) : ch);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

bool is_stopword(std::string_view term) {
    static constexpr std::array<std::string_view, 32> kStopwords = {
        "a",  "an",  "and", "are", "as",   "at",   "be",   "by",  "for", "from", "has",
        "he", "in",  "is",  "it",  "its",  "of",   "on",   "or",  "she", "that", "the",
        "to", "was", "were", "will", "with", "this", "but", "his", "her", "had",
    };
    return std::find(kStopwords.begin(), kStopwords.end(), term) != kStopwords.end();
}

namespace {

bool all_stopwords(const std::vector<std::string>& terms, std::size_t begin, std::size_t len) {
    for (std::size_t i = begin; i < begin + len; ++i) {
        if (!is_stopword(terms[i])) {
            return false;
        }
    }
    return true;
}

} // namespace

ParsedQuery parse_query(const std::string& query, const PhraseWeights& weights) {
    ParsedQuery parsed;
    parsed.terms = analyze(query);
    if (parsed.terms.empty()) {
        throw EmptyQuery("query has no searchable terms: \"" + query + "\"");
    }
    for (std::size_t len : {std::size_t{2}, std::size_t{3}}) {
        if (parsed.terms.size() < len) {
            continue;
        }
        const double weight = len == 2 ? weights.bigram : weights.trigram;
        for (std::size_t i = 0; i + len <= parsed.terms.size(); ++i) {
            if (all_stopwords(parsed.terms, i, len)) {
                continue;
            }
            Phrase phrase;
            phrase.terms.assign(parsed.terms.begin() + static_cast<std::ptrdiff_t>(i),
                                parsed.terms.begin() + static_cast<std::ptrdiff_t>(i + len));
            phrase.weight = weight;
            parsed.phrases.push_back(std::move(phrase));
        }
    }
    return parsed;
}

} // namespace bcas::retrieval
