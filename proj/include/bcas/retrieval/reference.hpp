#pragma once

#include "bcas/retrieval/bm25.hpp"
#include "bcas/retrieval/chunk.hpp"
#include "bcas/retrieval/embedder.hpp"

#include <span>
#include <string>
#include <vector>

namespace bcas::retrieval::ref {

/// Brute-force retrieval straight from the formulas: every chunk is
/// tokenized and scored directly, with no inverted index, no candidate
/// pruning and a single thread. Kept as the test oracle for the indexed,
/// OpenMP-parallel implementations and as the serial side of the benchmark.

std::vector<ScoredChunk> search_bm25(const std::string& query, std::span<const Chunk> chunks,
                                     std::size_t k = 5, const Bm25Params& params = {});

double score_bm25(const ParsedQuery& query, std::span<const Chunk> chunks, std::size_t chunk_idx,
                  const Bm25Params& params = {});

std::vector<ScoredChunk> search_dense(const std::string& query, std::span<const Chunk> chunks,
                                      Embedder& embedder, std::size_t k = 5);

} // namespace bcas::retrieval::ref
