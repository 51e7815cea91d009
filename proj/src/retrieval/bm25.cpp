#include "bcas/retrieval/bm25.hpp"

#include <algorithm>
#include <cmath>

namespace bcas::retrieval {

double bm25_idf(std::uint64_t corpus_size, std::uint64_t doc_frequency) {
    const double n = static_cast<double>(corpus_size);
    const double df = static_cast<double>(doc_frequency);
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double bm25_tf(double tf, double chunk_length, double avg_chunk_length, const Bm25Params& params) {
    const double norm = 1.0 - params.b + params.b * chunk_length / avg_chunk_length;
    return tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>>
phrase_occurrences(const Index& index, std::span<const std::uint32_t> term_ids) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    if (term_ids.empty()) {
        return out;
    }
    const std::vector<Posting>& first = index.postings(term_ids[0]);
    for (const Posting& lead : first) {
        // Positions of the full phrase starting at each lead position.
        std::uint32_t count = 0;
        bool chunk_has_all = true;
        std::vector<const Posting*> rest(term_ids.size(), nullptr);
        for (std::size_t t = 1; t < term_ids.size(); ++t) {
            const std::vector<Posting>& list = index.postings(term_ids[t]);
            const auto it = std::lower_bound(
                list.begin(), list.end(), lead.chunk,
                [](const Posting& p, std::uint32_t chunk) { return p.chunk < chunk; });
            if (it == list.end() || it->chunk != lead.chunk) {
                chunk_has_all = false;
                break;
            }
            rest[t] = &*it;
        }
        if (!chunk_has_all) {
            continue;
        }
        for (const std::uint32_t pos : lead.positions) {
            bool match = true;
            for (std::size_t t = 1; t < term_ids.size(); ++t) {
                const auto& positions = rest[t]->positions;
                if (!std::binary_search(positions.begin(), positions.end(),
                                        pos + static_cast<std::uint32_t>(t))) {
                    match = false;
                    break;
                }
            }
            if (match) {
                ++count;
            }
        }
        if (count > 0) {
            out.emplace_back(lead.chunk, count);
        }
    }
    return out;
}

namespace {

struct ResolvedTerm {
    std::optional<std::uint32_t> id;
    std::uint64_t df = 0;
};

struct ResolvedPhrase {
    std::vector<std::uint32_t> ids;   // empty when any term is out of vocabulary
    double weight = 1.0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> occurrences;   // sorted by chunk
};

struct ResolvedQuery {
    std::vector<ResolvedTerm> terms;
    std::vector<ResolvedPhrase> phrases;
};

ResolvedQuery resolve(const ParsedQuery& query, const Index& index) {
    ResolvedQuery resolved;
    resolved.terms.reserve(query.terms.size());
    for (const std::string& term : query.terms) {
        ResolvedTerm rt;
        rt.id = index.term_id(term);
        rt.df = rt.id.has_value() ? index.postings(*rt.id).size() : 0;
        resolved.terms.push_back(rt);
    }
    resolved.phrases.reserve(query.phrases.size());
    for (const Phrase& phrase : query.phrases) {
        ResolvedPhrase rp;
        rp.weight = phrase.weight;
        rp.ids.reserve(phrase.terms.size());
        bool in_vocab = true;
        for (const std::string& term : phrase.terms) {
            const auto id = index.term_id(term);
            if (!id.has_value()) {
                in_vocab = false;
                break;
            }
            rp.ids.push_back(*id);
        }
        if (!in_vocab) {
            rp.ids.clear();
        } else {
            rp.occurrences = phrase_occurrences(index, rp.ids);
        }
        resolved.phrases.push_back(std::move(rp));
    }
    return resolved;
}

std::uint32_t term_frequency(const std::vector<Posting>& postings, std::uint32_t chunk) {
    const auto it = std::lower_bound(
        postings.begin(), postings.end(), chunk,
        [](const Posting& p, std::uint32_t c) { return p.chunk < c; });
    if (it == postings.end() || it->chunk != chunk) {
        return 0;
    }
    return static_cast<std::uint32_t>(it->positions.size());
}

std::uint32_t phrase_count(const ResolvedPhrase& phrase, std::uint32_t chunk) {
    const auto it = std::lower_bound(
        phrase.occurrences.begin(), phrase.occurrences.end(), chunk,
        [](const std::pair<std::uint32_t, std::uint32_t>& occ, std::uint32_t c) {
            return occ.first < c;
        });
    if (it == phrase.occurrences.end() || it->first != chunk) {
        return 0;
    }
    return it->second;
}

double score_chunk(const ResolvedQuery& query, const Index& index, std::uint32_t chunk_idx,
                   const Bm25Params& params) {
    const double len = static_cast<double>(index.stream(chunk_idx).size());
    const double avg = index.stats().avg_chunk_length;
    const std::uint64_t n = index.stats().chunk_count;

    double score = 0.0;
    for (const ResolvedTerm& term : query.terms) {
        if (!term.id.has_value() || term.df == 0) {
            continue;
        }
        const std::uint32_t tf = term_frequency(index.postings(*term.id), chunk_idx);
        if (tf == 0) {
            continue;
        }
        score += bm25_idf(n, term.df) * bm25_tf(static_cast<double>(tf), len, avg, params);
    }
    for (const ResolvedPhrase& phrase : query.phrases) {
        if (phrase.occurrences.empty()) {
            continue;
        }
        const std::uint32_t count = phrase_count(phrase, chunk_idx);
        if (count == 0) {
            continue;
        }
        score += phrase.weight * bm25_idf(n, phrase.occurrences.size()) *
                 bm25_tf(static_cast<double>(count), len, avg, params);
    }
    return score;
}

} // namespace

double score_bm25(const ParsedQuery& query, const Index& index, std::size_t chunk_idx,
                  const Bm25Params& params) {
    return score_chunk(resolve(query, index), index, static_cast<std::uint32_t>(chunk_idx),
                       params);
}

std::vector<ScoredChunk> search_bm25(const std::string& query, const Index& index, std::size_t k,
                                     const Bm25Params& params) {
    const ParsedQuery parsed = parse_query(query, params.phrase_weights());
    const ResolvedQuery resolved = resolve(parsed, index);

    std::vector<std::uint32_t> candidates;
    for (const ResolvedTerm& term : resolved.terms) {
        if (!term.id.has_value()) {
            continue;
        }
        for (const Posting& posting : index.postings(*term.id)) {
            candidates.push_back(posting.chunk);
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<double> scores(candidates.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(candidates.size()); ++i) {
        scores[i] = score_chunk(resolved, index, candidates[i], params);
    }

    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return index.chunk(candidates[a]).chunk_id < index.chunk(candidates[b]).chunk_id;
    });

    std::vector<ScoredChunk> results;
    const std::size_t take = std::min(k, order.size());
    results.reserve(take);
    for (std::size_t rank = 0; rank < take; ++rank) {
        ScoredChunk scored;
        scored.chunk = index.chunk(candidates[order[rank]]);
        scored.lexical_score = scores[order[rank]];
        scored.fused_rank = rank + 1;
        results.push_back(std::move(scored));
    }
    return results;
}

} // namespace bcas::retrieval
