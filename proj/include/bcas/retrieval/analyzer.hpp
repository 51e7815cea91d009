#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bcas::retrieval {

/// Lowercases and splits on non-alphanumeric bytes. Bytes >= 0x80 are kept
/// as-is, so multi-byte sequences survive untouched.
std::vector<std::string> analyze(std::string_view text);

bool is_stopword(std::string_view term);

struct Phrase {
    std::vector<std::string> terms;   // contiguous sub-sequence of the query terms
    double weight = 1.0;
};

struct ParsedQuery {
    std::vector<std::string> terms;   // stopwords kept for term scoring
    std::vector<Phrase> phrases;      // adjacent bigrams and trigrams
};

struct PhraseWeights {
    double bigram = 1.5;
    double trigram = 2.0;
};

/// Normalizes the query and extracts every adjacent two- and three-term
/// sub-sequence as a boost phrase. Phrases made only of stopwords are
/// dropped. Throws EmptyQuery when no terms survive normalization.
ParsedQuery parse_query(const std::string& query, const PhraseWeights& weights = {});

} // namespace bcas::retrieval
