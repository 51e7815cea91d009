#pragma once

#include "bcas/engine.hpp"
#include "bcas/retrieval/bm25.hpp"
#include "bcas/retrieval/embedder.hpp"
#include "bcas/retrieval/fusion.hpp"
#include "bcas/retrieval/index.hpp"
#include "bcas/retrieval/rerank.hpp"

#include <atomic>
#include <map>
#include <string>
#include <vector>

namespace bcas::retrieval {

enum class SearchMode { BM25, HS, HS_RR };

std::string to_string(SearchMode mode);
SearchMode search_mode_from_string(std::string_view text);   // throws ConfigError

struct SearchConfig {
    SearchMode mode = SearchMode::BM25;
    std::size_t top_k = 5;             // chunks shown to the agent, at most 5
    std::size_t candidate_pool = 100;  // hybrid pool width for fusion/re-ranking
    Bm25Params bm25;
    RrfParams rrf;
    bool rerank_fallback_to_hybrid = true;

    void validate() const;
};

struct SearchOutcome {
    std::vector<ScoredChunk> chunks;
    bool reranker_fell_back = false;
};

/// Loaded indices by collection name.
class IndexStore {
public:
    void add(Index index);
    bool contains(std::string_view collection) const;
    const Index& get(std::string_view collection) const;   // throws UnknownCollection
    std::vector<std::string> collections() const;

private:
    std::map<std::string, Index, std::less<>> indices_;
};

/// Search pipeline bound to one collection and mode; what the trajectory
/// engine calls. Concurrent use is safe: the index is immutable and the
/// providers declare their own thread safety.
class Searcher : public SearchService {
public:
    Searcher(const Index& index, SearchConfig config, Embedder* embedder = nullptr,
             Reranker* reranker = nullptr);

    /// Numbered observation text for the engine; at most 5 chunks.
    std::string search(const std::string& query) override;
    /// Structured results for tests and telemetry.
    SearchOutcome search_scored(const std::string& query);

    /// A rerank fallback happened at least once on this searcher.
    bool fallback_seen() const { return fallback_seen_.load(); }
    const Index& index() const { return index_; }

private:
    const Index& index_;
    SearchConfig config_;
    Embedder* embedder_;
    Reranker* reranker_;
    std::atomic<bool> fallback_seen_{false};
};

std::string format_observation(std::span<const ScoredChunk> chunks);

} // namespace bcas::retrieval
