#include "bcas/retrieval/reference.hpp"

#include "bcas/retrieval/analyzer.hpp"

#include <algorithm>
#include <cmath>

namespace bcas::retrieval::ref {

namespace {

// Same closed-form expressions as the indexed scorer, written out here so
// the two routes stay numerically identical term by term.
double idf(double n, double df) {
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double tf_part(double tf, double len, double avg, const Bm25Params& params) {
    const double norm = 1.0 - params.b + params.b * len / avg;
    return tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
}

std::uint32_t count_term(const std::vector<std::string>& tokens, const std::string& term) {
    return static_cast<std::uint32_t>(std::count(tokens.begin(), tokens.end(), term));
}

std::uint32_t count_phrase(const std::vector<std::string>& tokens,
                           const std::vector<std::string>& phrase) {
    if (tokens.size() < phrase.size()) {
        return 0;
    }
    std::uint32_t count = 0;
    for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < phrase.size(); ++j) {
            if (tokens[i + j] != phrase[j]) {
                match = false;
                break;
            }
        }
        if (match) {
            ++count;
        }
    }
    return count;
}

struct TokenizedCorpus {
    std::vector<std::vector<std::string>> tokens;
    double avg_len = 0.0;
};

TokenizedCorpus tokenize_all(std::span<const Chunk> chunks) {
    TokenizedCorpus corpus;
    corpus.tokens.reserve(chunks.size());
    std::uint64_t total = 0;
    for (const Chunk& chunk : chunks) {
        corpus.tokens.push_back(analyze(chunk.text));
        total += corpus.tokens.back().size();
    }
    corpus.avg_len = chunks.empty()
                         ? 0.0
                         : static_cast<double>(total) / static_cast<double>(chunks.size());
    return corpus;
}

struct QueryStats {
    std::vector<std::uint64_t> term_dfs;     // aligned with query.terms
    std::vector<std::uint64_t> phrase_dfs;   // aligned with query.phrases
};

QueryStats document_frequencies(const ParsedQuery& query, const TokenizedCorpus& corpus) {
    QueryStats stats;
    stats.term_dfs.assign(query.terms.size(), 0);
    stats.phrase_dfs.assign(query.phrases.size(), 0);
    for (const auto& tokens : corpus.tokens) {
        for (std::size_t t = 0; t < query.terms.size(); ++t) {
            if (std::find(tokens.begin(), tokens.end(), query.terms[t]) != tokens.end()) {
                ++stats.term_dfs[t];
            }
        }
        for (std::size_t p = 0; p < query.phrases.size(); ++p) {
            if (count_phrase(tokens, query.phrases[p].terms) > 0) {
                ++stats.phrase_dfs[p];
            }
        }
    }
    return stats;
}

double score_one(const ParsedQuery& query, const QueryStats& stats, const TokenizedCorpus& corpus,
                 std::size_t chunk_idx, const Bm25Params& params) {
    const double n = static_cast<double>(corpus.tokens.size());
    const double len = static_cast<double>(corpus.tokens[chunk_idx].size());

    double score = 0.0;
    for (std::size_t t = 0; t < query.terms.size(); ++t) {
        if (stats.term_dfs[t] == 0) {
            continue;
        }
        const std::uint32_t tf = count_term(corpus.tokens[chunk_idx], query.terms[t]);
        if (tf == 0) {
            continue;
        }
        score += idf(n, static_cast<double>(stats.term_dfs[t])) *
                 tf_part(static_cast<double>(tf), len, corpus.avg_len, params);
    }
    for (std::size_t p = 0; p < query.phrases.size(); ++p) {
        if (stats.phrase_dfs[p] == 0) {
            continue;
        }
        const std::uint32_t count = count_phrase(corpus.tokens[chunk_idx], query.phrases[p].terms);
        if (count == 0) {
            continue;
        }
        score += query.phrases[p].weight * idf(n, static_cast<double>(stats.phrase_dfs[p])) *
                 tf_part(static_cast<double>(count), len, corpus.avg_len, params);
    }
    return score;
}

template <typename ScoreOf>
std::vector<ScoredChunk> rank_all(std::span<const Chunk> chunks, std::size_t k, ScoreOf&& score_of,
                                  bool dense) {
    std::vector<std::size_t> order(chunks.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::vector<double> scores(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        scores[i] = score_of(i);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return chunks[a].chunk_id < chunks[b].chunk_id;
    });

    std::vector<ScoredChunk> out;
    const std::size_t take = std::min(k, order.size());
    out.reserve(take);
    for (std::size_t rank = 0; rank < take; ++rank) {
        ScoredChunk scored;
        scored.chunk = chunks[order[rank]];
        if (dense) {
            scored.dense_score = scores[order[rank]];
        } else {
            scored.lexical_score = scores[order[rank]];
        }
        scored.fused_rank = rank + 1;
        out.push_back(std::move(scored));
    }
    return out;
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size() || a.empty()) {
        return 0.0;
    }
    if (std::equal(a.begin(), a.end(), b.begin())) {
        bool zero = true;
        for (const float v : a) {
            if (v != 0.0f) {
                zero = false;
                break;
            }
        }
        return zero ? 0.0 : 1.0;
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
        na += static_cast<double>(a[i]) * static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace

std::vector<ScoredChunk> search_bm25(const std::string& query, std::span<const Chunk> chunks,
                                     std::size_t k, const Bm25Params& params) {
    const ParsedQuery parsed = parse_query(query, params.phrase_weights());
    const TokenizedCorpus corpus = tokenize_all(chunks);
    const QueryStats stats = document_frequencies(parsed, corpus);

    std::vector<ScoredChunk> ranked = rank_all(
        chunks, chunks.size(),
        [&](std::size_t i) { return score_one(parsed, stats, corpus, i, params); }, false);

    // Chunks holding at least one query term always score strictly positive,
    // so the zero scores are exactly the chunks the indexed candidate set
    // leaves out.
    std::vector<ScoredChunk> out;
    for (ScoredChunk& scored : ranked) {
        if (out.size() == k || scored.lexical_score <= 0.0) {
            break;
        }
        scored.fused_rank = out.size() + 1;
        out.push_back(std::move(scored));
    }
    return out;
}

double score_bm25(const ParsedQuery& query, std::span<const Chunk> chunks, std::size_t chunk_idx,
                  const Bm25Params& params) {
    const TokenizedCorpus corpus = tokenize_all(chunks);
    return score_one(query, document_frequencies(query, corpus), corpus, chunk_idx, params);
}

std::vector<ScoredChunk> search_dense(const std::string& query, std::span<const Chunk> chunks,
                                      Embedder& embedder, std::size_t k) {
    const std::vector<float> query_vec = embedder.embed(query);
    std::vector<std::vector<float>> vectors;
    vectors.reserve(chunks.size());
    for (const Chunk& chunk : chunks) {
        vectors.push_back(embedder.embed(chunk.text));
    }
    return rank_all(
        chunks, k, [&](std::size_t i) { return cosine(query_vec, vectors[i]); }, true);
}

} // namespace bcas::retrieval::ref
