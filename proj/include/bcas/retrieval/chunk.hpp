#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace bcas::retrieval {

struct Chunk {
    std::string chunk_id;        // unique within a collection
    std::string doc_id;
    std::string collection;
    std::string text;            // non-empty
    std::uint32_t token_count = 0;
};

struct ScoredChunk {
    Chunk chunk;
    double lexical_score = 0.0;
    double dense_score = 0.0;            // cosine similarity, in [-1, 1]
    std::size_t fused_rank = 0;          // 1-based rank within its result list
    std::optional<double> rerank_score;
};

} // namespace bcas::retrieval
