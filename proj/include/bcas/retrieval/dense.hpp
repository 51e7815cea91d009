#pragma once

#include "bcas/retrieval/chunk.hpp"
#include "bcas/retrieval/embedder.hpp"
#include "bcas/retrieval/index.hpp"

#include <vector>

namespace bcas::retrieval {

/// Embeds every chunk and attaches the vectors to the index. The similarity
/// scans are exact, so this is the only approximation-free preparation step.
void embed_corpus(Index& index, Embedder& embedder);

/// Exact exhaustive top-k by cosine similarity between the query vector and
/// chunk vectors. Ties break by chunk_id ascending. The scan runs in
/// parallel; results are deterministic regardless of thread count.
std::vector<ScoredChunk> search_dense(const std::string& query, const Index& index,
                                      Embedder& embedder, std::size_t k = 5);

} // namespace bcas::retrieval
