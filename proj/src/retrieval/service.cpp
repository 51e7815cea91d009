#include "bcas/retrieval/service.hpp"

#include "bcas/errors.hpp"
#include "bcas/retrieval/dense.hpp"

#include <algorithm>

namespace bcas::retrieval {

std::string to_string(SearchMode mode) {
    switch (mode) {
        case SearchMode::BM25: return "BM25";
        case SearchMode::HS: return "HS";
        case SearchMode::HS_RR: return "HS_RR";
    }
    return "BM25";
}

SearchMode search_mode_from_string(std::string_view text) {
    if (text == "BM25" || text == "bm25") return SearchMode::BM25;
    if (text == "HS" || text == "hs") return SearchMode::HS;
    if (text == "HS_RR" || text == "hs_rr" || text == "HS+RR") return SearchMode::HS_RR;
    throw ConfigError("unknown search mode: " + std::string(text));
}

void SearchConfig::validate() const {
    if (top_k < 1 || top_k > 5) {
        throw ConfigError("search: top_k must be in [1, 5]");
    }
    if (candidate_pool < top_k) {
        throw ConfigError("search: candidate_pool must be >= top_k");
    }
}

void IndexStore::add(Index index) {
    std::string collection = index.collection();
    indices_.insert_or_assign(std::move(collection), std::move(index));
}

bool IndexStore::contains(std::string_view collection) const {
    return indices_.find(collection) != indices_.end();
}

const Index& IndexStore::get(std::string_view collection) const {
    auto it = indices_.find(collection);
    if (it == indices_.end()) {
        throw UnknownCollection("unknown collection: " + std::string(collection));
    }
    return it->second;
}

std::vector<std::string> IndexStore::collections() const {
    std::vector<std::string> out;
    out.reserve(indices_.size());
    for (const auto& [name, index] : indices_) {
        out.push_back(name);
    }
    return out;
}

Searcher::Searcher(const Index& index, SearchConfig config, Embedder* embedder, Reranker* reranker)
    : index_(index), config_(config), embedder_(embedder), reranker_(reranker) {
    config_.validate();
    if (config_.mode != SearchMode::BM25) {
        if (embedder_ == nullptr) {
            throw ConfigError(to_string(config_.mode) + " requires an embedding provider");
        }
        if (!index_.has_embeddings()) {
            throw EmbeddingUnavailable("collection " + index_.collection() +
                                       " has no embeddings; re-index with an embedder");
        }
    }
    if (config_.mode == SearchMode::HS_RR && reranker_ == nullptr) {
        throw ConfigError("HS_RR requires a reranker");
    }
}

SearchOutcome Searcher::search_scored(const std::string& query) {
    SearchOutcome outcome;
    switch (config_.mode) {
        case SearchMode::BM25:
            outcome.chunks = search_bm25(query, index_, config_.top_k, config_.bm25);
            return outcome;
        case SearchMode::HS: {
            const auto lexical = search_bm25(query, index_, config_.candidate_pool, config_.bm25);
            const auto dense = search_dense(query, index_, *embedder_, config_.candidate_pool);
            outcome.chunks = fuse_hybrid(lexical, dense, config_.top_k, config_.rrf);
            return outcome;
        }
        case SearchMode::HS_RR: {
            const auto lexical = search_bm25(query, index_, config_.candidate_pool, config_.bm25);
            const auto dense = search_dense(query, index_, *embedder_, config_.candidate_pool);
            auto pool = fuse_hybrid(lexical, dense, config_.candidate_pool, config_.rrf);
            try {
                std::vector<std::string> texts;
                texts.reserve(pool.size());
                for (const ScoredChunk& scored : pool) {
                    texts.push_back(scored.chunk.text);
                }
                const auto scores = reranker_->score(query, texts);
                if (scores.size() != pool.size()) {
                    throw RerankerUnavailable("reranker returned wrong score count");
                }
                for (std::size_t i = 0; i < pool.size(); ++i) {
                    pool[i].rerank_score = scores[i];
                }
                std::sort(pool.begin(), pool.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
                    if (*a.rerank_score != *b.rerank_score) {
                        return *a.rerank_score > *b.rerank_score;
                    }
                    return a.chunk.chunk_id < b.chunk.chunk_id;
                });
                pool.resize(std::min(config_.top_k, pool.size()));
                for (std::size_t i = 0; i < pool.size(); ++i) {
                    pool[i].fused_rank = i + 1;
                }
                outcome.chunks = std::move(pool);
                return outcome;
            } catch (const RerankerUnavailable&) {
                if (!config_.rerank_fallback_to_hybrid) {
                    throw;
                }
                fallback_seen_.store(true);
                outcome.reranker_fell_back = true;
                pool.resize(std::min(config_.top_k, pool.size()));
                for (std::size_t i = 0; i < pool.size(); ++i) {
                    pool[i].fused_rank = i + 1;
                    pool[i].rerank_score.reset();
                }
                outcome.chunks = std::move(pool);
                return outcome;
            }
        }
    }
    return outcome;
}

std::string Searcher::search(const std::string& query) {
    return format_observation(search_scored(query).chunks);
}

std::string format_observation(std::span<const ScoredChunk> chunks) {
    if (chunks.empty()) {
        return "No results.";
    }
    std::string out;
    std::size_t shown = 0;
    for (const ScoredChunk& scored : chunks) {
        if (shown == 5) {
            break;   // observations are capped at five chunks in every mode
        }
        ++shown;
        out += "[" + std::to_string(shown) + "] (" + scored.chunk.doc_id + ") " +
               scored.chunk.text + "\n";
    }
    return out;
}

} // namespace bcas::retrieval
