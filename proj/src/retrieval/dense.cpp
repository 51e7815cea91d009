#include "bcas/retrieval/dense.hpp"

#include "bcas/errors.hpp"

#include <algorithm>
#include <numeric>

namespace bcas::retrieval {

void embed_corpus(Index& index, Embedder& embedder) {
    const std::size_t dim = embedder.dimension();
    std::vector<float> flat;

    if (dim > 0) {
        // Known dimension up front: embed chunks in parallel straight into
        // the flat buffer.
        flat.resize(index.size() * dim);
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(index.size()); ++i) {
            const std::vector<float> vec = embedder.embed(index.chunk(i).text);
            std::copy(vec.begin(), vec.end(), flat.begin() + i * static_cast<std::ptrdiff_t>(dim));
        }
        index.attach_embeddings(std::move(flat), dim, embedder.id());
        return;
    }

    // Remote embedders may not know their dimension until the first reply;
    // batch through the provider interface instead.
    std::vector<std::string> texts;
    texts.reserve(index.size());
    for (const Chunk& chunk : index.chunks()) {
        texts.push_back(chunk.text);
    }
    const auto vectors = embedder.embed_batch(texts);
    if (vectors.empty()) {
        throw EmbeddingUnavailable("embedder returned no vectors for corpus");
    }
    const std::size_t learned_dim = vectors.front().size();
    flat.reserve(vectors.size() * learned_dim);
    for (const auto& vec : vectors) {
        if (vec.size() != learned_dim) {
            throw EmbeddingUnavailable("embedder returned mixed dimensions");
        }
        flat.insert(flat.end(), vec.begin(), vec.end());
    }
    index.attach_embeddings(std::move(flat), learned_dim, embedder.id());
}

std::vector<ScoredChunk> search_dense(const std::string& query, const Index& index,
                                      Embedder& embedder, std::size_t k) {
    if (!index.has_embeddings()) {
        throw EmbeddingUnavailable("collection " + index.collection() + " has no embeddings");
    }
    const std::vector<float> query_vec = embedder.embed(query);
    if (query_vec.size() != index.embedding_dim()) {
        throw EmbeddingUnavailable("query embedding dimension " +
                                   std::to_string(query_vec.size()) + " != index dimension " +
                                   std::to_string(index.embedding_dim()));
    }

    std::vector<double> sims(index.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(index.size()); ++i) {
        sims[i] = cosine_similarity(query_vec, index.embedding(i));
    }

    std::vector<std::size_t> order(index.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sims[a] != sims[b]) {
            return sims[a] > sims[b];
        }
        return index.chunk(a).chunk_id < index.chunk(b).chunk_id;
    });

    const std::size_t take = std::min(k, order.size());
    std::vector<ScoredChunk> results;
    results.reserve(take);
    for (std::size_t rank = 0; rank < take; ++rank) {
        ScoredChunk scored;
        scored.chunk = index.chunk(order[rank]);
        scored.dense_score = sims[order[rank]];
        scored.fused_rank = rank + 1;
        results.push_back(std::move(scored));
    }
    return results;
}

} // namespace bcas::retrieval
