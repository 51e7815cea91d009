#pragma once

#include "bcas/retrieval/chunk.hpp"

#include <span>
#include <string>
#include <vector>

namespace bcas::retrieval {

struct ChunkingConfig {
    std::size_t chunk_tokens = 300;    // whitespace tokens per chunk
    std::size_t overlap_tokens = 50;   // shared with the previous chunk

    void validate() const;
};

/// Deterministic fixed-size sliding chunks over whitespace tokens. Chunk
/// texts keep the original bytes (including separators), so concatenating
/// them with each chunk's overlap prefix dropped reproduces the document.
std::vector<Chunk> chunk_document(const std::string& text, const std::string& doc_id,
                                  const std::string& collection,
                                  const ChunkingConfig& config = {});

/// Inverse of chunk_document for a single document's chunks, in order.
std::string reconstruct_document(std::span<const Chunk> chunks, const ChunkingConfig& config = {});

} // namespace bcas::retrieval
