#pragma once

#include "bcas/retrieval/analyzer.hpp"
#include "bcas/retrieval/chunk.hpp"
#include "bcas/retrieval/index.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace bcas::retrieval {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
    double bigram_boost = 1.5;
    double trigram_boost = 2.0;

    PhraseWeights phrase_weights() const { return {bigram_boost, trigram_boost}; }
};

/// Robertson/Sparck-Jones idf with the +1 shift that keeps scores >= 0.
double bm25_idf(std::uint64_t corpus_size, std::uint64_t doc_frequency);

/// Saturating, length-normalized term frequency component.
double bm25_tf(double tf, double chunk_length, double avg_chunk_length, const Bm25Params& params);

/// Contiguous occurrences of the phrase (by term id) per chunk, ascending by
/// chunk index. Empty when any phrase term is out of vocabulary. Overlapping
/// occurrences count.
std::vector<std::pair<std::uint32_t, std::uint32_t>>
phrase_occurrences(const Index& index, std::span<const std::uint32_t> term_ids);

/// Classic BM25 term sum plus each phrase scored as a weighted virtual term
/// over its contiguous-occurrence count.
double score_bm25(const ParsedQuery& query, const Index& index, std::size_t chunk_idx,
                  const Bm25Params& params = {});

/// Top-k by score_bm25 over the candidate set (chunks containing at least one
/// query term). Ties break by chunk_id ascending. Candidate scoring runs in
/// parallel; results are deterministic regardless of thread count.
std::vector<ScoredChunk> search_bm25(const std::string& query, const Index& index,
                                     std::size_t k = 5, const Bm25Params& params = {});

} // namespace bcas::retrieval
