#pragma once

#include "bcas/backend.hpp"
#include "bcas/engine.hpp"
#include "bcas/retrieval/chunk.hpp"

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace bcas::testing {

inline ModelResponse resp(std::string text, std::uint64_t completion = 30,
                          std::uint64_t prompt = 100) {
    ModelResponse response;
    response.text = std::move(text);
    response.usage = TokenUsage{prompt, completion};
    return response;
}

inline std::string search_text(const std::string& query, const std::string& thought = "") {
    return (thought.empty() ? "Searching." : thought) +
           "\n<<ACTION>>\ntool: search_database\narg.query: " + query + "\n<<END>>\n";
}

inline std::string answer_text(const std::string& answer, const std::string& thought = "") {
    return (thought.empty() ? "I know enough." : thought) +
           "\n<<ACTION>>\ntool: ready_to_answer\narg.answer: " + answer + "\n<<END>>\n";
}

inline TraceStep search_step(const std::string& query, std::uint64_t completion = 30,
                             std::string expect = "") {
    return TraceStep{std::move(expect), resp(search_text(query), completion)};
}

inline TraceStep answer_step(const std::string& answer, std::uint64_t completion = 20,
                             std::string expect = "") {
    return TraceStep{std::move(expect), resp(answer_text(answer), completion)};
}

/// Search stub that counts invocations; the gating tests hang off this.
class CountingSearch : public SearchService {
public:
    std::string search(const std::string& query) override {
        ++calls_;
        last_query_ = query;
        return "[1] (stub-doc) result for " + query + "\n";
    }
    std::uint32_t calls() const { return calls_; }
    const std::string& last_query() const { return last_query_; }

private:
    std::uint32_t calls_ = 0;
    std::string last_query_;
};

/// Unique temp directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("bcas_test_" + std::to_string(rd()) + "_" + std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline retrieval::Chunk make_chunk(const std::string& id, const std::string& text,
                                   const std::string& doc = "doc", const std::string& coll = "c") {
    retrieval::Chunk chunk;
    chunk.chunk_id = id;
    chunk.doc_id = doc;
    chunk.collection = coll;
    chunk.text = text;
    chunk.token_count = 1;
    return chunk;
}

/// Random word corpus for oracle comparisons.
inline std::vector<retrieval::Chunk> random_corpus(std::mt19937_64& rng, std::size_t max_chunks,
                                                   std::size_t vocab_size = 40,
                                                   std::size_t max_len = 50) {
    const std::size_t count = 1 + rng() % max_chunks;
    std::vector<retrieval::Chunk> chunks;
    chunks.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t len = 3 + rng() % max_len;
        std::string text;
        for (std::size_t t = 0; t < len; ++t) {
            text += "w" + std::to_string(rng() % vocab_size);
            text += ' ';
        }
        char id[32];
        std::snprintf(id, sizeof(id), "k%04zu", i);
        chunks.push_back(make_chunk(id, text, "d" + std::to_string(i / 4)));
    }
    return chunks;
}

inline std::string random_query(std::mt19937_64& rng, std::size_t vocab_size = 40,
                                std::size_t max_terms = 8) {
    const std::size_t terms = 1 + rng() % max_terms;
    std::string query;
    for (std::size_t t = 0; t < terms; ++t) {
        query += "w" + std::to_string(rng() % vocab_size);
        query += ' ';
    }
    return query;
}

} // namespace bcas::testing
