#include "bcas/retrieval/fusion.hpp"

#include <algorithm>
#include <map>

namespace bcas::retrieval {

std::vector<ScoredChunk> fuse_hybrid(std::span<const ScoredChunk> lexical,
                                     std::span<const ScoredChunk> dense, std::size_t k,
                                     const RrfParams& params) {
    struct Entry {
        ScoredChunk scored;
        double fused = 0.0;
    };
    std::map<std::string, Entry> entries;   // keyed by chunk_id

    for (std::size_t i = 0; i < lexical.size(); ++i) {
        Entry& entry = entries[lexical[i].chunk.chunk_id];
        entry.scored.chunk = lexical[i].chunk;
        entry.scored.lexical_score = lexical[i].lexical_score;
        entry.fused += 1.0 / (params.k + static_cast<double>(i + 1));
    }
    for (std::size_t i = 0; i < dense.size(); ++i) {
        Entry& entry = entries[dense[i].chunk.chunk_id];
        entry.scored.chunk = dense[i].chunk;
        entry.scored.dense_score = dense[i].dense_score;
        entry.fused += 1.0 / (params.k + static_cast<double>(i + 1));
    }

    std::vector<Entry> fused;
    fused.reserve(entries.size());
    for (auto& [chunk_id, entry] : entries) {
        fused.push_back(std::move(entry));
    }
    // entries is ordered by chunk_id, so a stable sort on the fused score
    // keeps the chunk_id tie-break.
    std::stable_sort(fused.begin(), fused.end(),
                     [](const Entry& a, const Entry& b) { return a.fused > b.fused; });

    const std::size_t take = std::min(k, fused.size());
    std::vector<ScoredChunk> out;
    out.reserve(take);
    for (std::size_t rank = 0; rank < take; ++rank) {
        fused[rank].scored.fused_rank = rank + 1;
        out.push_back(std::move(fused[rank].scored));
    }
    return out;
}

} // namespace bcas::retrieval
