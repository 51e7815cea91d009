// Compares the OpenMP-parallel indexed retrieval against the serial
// brute-force reference on a synthetic corpus: correctness first (outputs
// must match exactly), then wall time for 1..N threads.
//
// Usage: retrieval_bench [chunks] [queries]

#include "bcas/retrieval/bm25.hpp"
#include "bcas/retrieval/dense.hpp"
#include "bcas/retrieval/index.hpp"
#include "bcas/retrieval/reference.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

using namespace bcas::retrieval;
using Clock = std::chrono::steady_clock;

namespace {

std::vector<std::string> make_vocab(std::size_t size) {
    std::vector<std::string> vocab;
    vocab.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        vocab.push_back("w" + std::to_string(i));
    }
    return vocab;
}

std::vector<Chunk> make_corpus(std::size_t chunk_count, std::mt19937_64& rng) {
    const auto vocab = make_vocab(800);
    std::vector<Chunk> chunks;
    chunks.reserve(chunk_count);
    for (std::size_t i = 0; i < chunk_count; ++i) {
        const std::size_t len = 40 + rng() % 80;
        std::string text;
        for (std::size_t t = 0; t < len; ++t) {
            text += vocab[rng() % vocab.size()];
            text += ' ';
        }
        Chunk chunk;
        char id[32];
        std::snprintf(id, sizeof(id), "c%06zu", i);
        chunk.chunk_id = id;
        chunk.doc_id = "doc" + std::to_string(i / 8);
        chunk.collection = "bench";
        chunk.text = std::move(text);
        chunk.token_count = static_cast<std::uint32_t>(len);
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

std::vector<std::string> make_queries(std::size_t count, std::mt19937_64& rng) {
    const auto vocab = make_vocab(800);
    std::vector<std::string> queries;
    queries.reserve(count);
    for (std::size_t q = 0; q < count; ++q) {
        std::string query;
        const std::size_t terms = 2 + rng() % 5;
        for (std::size_t t = 0; t < terms; ++t) {
            query += vocab[rng() % vocab.size()];
            query += ' ';
        }
        queries.push_back(std::move(query));
    }
    return queries;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool same_results(const std::vector<ScoredChunk>& a, const std::vector<ScoredChunk>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].chunk.chunk_id != b[i].chunk.chunk_id) {
            return false;
        }
    }
    return true;
}

} // namespace

int main(int argc, char** argv) {
    const std::size_t chunk_count = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 20000;
    const std::size_t query_count = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 40;

    std::mt19937_64 rng(7);
    printf("building corpus: %zu chunks, %zu queries\n", chunk_count, query_count);
    const std::vector<Chunk> chunks = make_corpus(chunk_count, rng);
    const std::vector<std::string> queries = make_queries(query_count, rng);

    HashEmbedder embedder;
    Index index = Index::build("bench", chunks);
    embed_corpus(index, embedder);

    // Correctness gate: indexed results must equal the brute-force reference.
    std::size_t checked = 0;
    for (std::size_t q = 0; q < std::min<std::size_t>(queries.size(), 8); ++q) {
        const auto indexed = search_bm25(queries[q], index, 5);
        const auto brute = ref::search_bm25(queries[q], chunks, 5);
        if (!same_results(indexed, brute)) {
            printf("MISMATCH: bm25 query %zu\n", q);
            return 1;
        }
        const auto indexed_dense = search_dense(queries[q], index, embedder, 5);
        const auto brute_dense = ref::search_dense(queries[q], chunks, embedder, 5);
        if (!same_results(indexed_dense, brute_dense)) {
            printf("MISMATCH: dense query %zu\n", q);
            return 1;
        }
        ++checked;
    }
    printf("correctness: %zu queries match the serial reference exactly\n\n", checked);

    const int max_threads = omp_get_max_threads();

    // Serial reference timings (single query each to keep the brute force
    // affordable; it re-tokenizes the corpus per call by design).
    {
        const auto start = Clock::now();
        ref::search_bm25(queries[0], chunks, 5);
        printf("%-28s %8.3f s/query\n", "reference bm25 (serial)", seconds_since(start));
    }
    {
        const auto start = Clock::now();
        ref::search_dense(queries[0], chunks, embedder, 5);
        printf("%-28s %8.3f s/query\n", "reference dense (serial)", seconds_since(start));
    }
    printf("\n");

    double bm25_t1 = 0.0;
    double dense_t1 = 0.0;
    for (int threads = 1; threads <= max_threads; threads *= 2) {
        omp_set_num_threads(threads);
        const auto bm25_start = Clock::now();
        for (const std::string& query : queries) {
            search_bm25(query, index, 5);
        }
        const double bm25_time = seconds_since(bm25_start) / static_cast<double>(queries.size());

        const auto dense_start = Clock::now();
        for (const std::string& query : queries) {
            search_dense(query, index, embedder, 5);
        }
        const double dense_time = seconds_since(dense_start) / static_cast<double>(queries.size());

        if (threads == 1) {
            bm25_t1 = bm25_time;
            dense_t1 = dense_time;
        }
        printf("indexed, %d thread(s):  bm25 %8.5f s/query (x%.2f)   dense %8.5f s/query (x%.2f)\n",
               threads, bm25_time, bm25_t1 / bm25_time, dense_time, dense_t1 / dense_time);
    }
    return 0;
}
