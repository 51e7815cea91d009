#pragma once

#include "bcas/retrieval/chunk.hpp"

#include <span>
#include <vector>

namespace bcas::retrieval {

struct RrfParams {
    double k = 60.0;
};

/// Reciprocal rank fusion over the union of both lists: each chunk scores
/// sum of 1/(k + rank) across the lists it appears in. Raw scores only ride
/// along for telemetry; fusion uses ranks alone. Ties break by chunk_id.
std::vector<ScoredChunk> fuse_hybrid(std::span<const ScoredChunk> lexical,
                                     std::span<const ScoredChunk> dense, std::size_t k,
                                     const RrfParams& params = {});

} // namespace bcas::retrieval
