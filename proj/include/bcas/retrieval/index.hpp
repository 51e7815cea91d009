#pragma once

#include "bcas/retrieval/chunk.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bcas::retrieval {

inline constexpr int kIndexSchemaVersion = 1;

struct CorpusStats {
    std::uint64_t chunk_count = 0;
    std::uint64_t total_tokens = 0;      // analyzer tokens across all chunks
    double avg_chunk_length = 0.0;
};

struct Posting {
    std::uint32_t chunk = 0;             // chunk index, ascending within a list
    std::vector<std::uint32_t> positions;
};

/// Immutable positional inverted index plus forward token streams over one
/// collection's chunks, with optional dense embeddings. Safe for unlimited
/// concurrent readers once built.
class Index {
public:
    Index() = default;

    static Index build(std::string collection, std::vector<Chunk> chunks);

    const std::string& collection() const { return collection_; }
    std::size_t size() const { return chunks_.size(); }
    const Chunk& chunk(std::size_t i) const { return chunks_[i]; }
    std::span<const Chunk> chunks() const { return chunks_; }
    const CorpusStats& stats() const { return stats_; }

    std::optional<std::uint32_t> term_id(std::string_view term) const;
    std::uint64_t doc_frequency(std::string_view term) const;
    const std::vector<Posting>& postings(std::uint32_t term_id) const;
    /// Term ids of a chunk's tokens, in order.
    std::span<const std::uint32_t> stream(std::size_t chunk_idx) const;

    bool has_embeddings() const { return embedding_dim_ > 0; }
    std::size_t embedding_dim() const { return embedding_dim_; }
    std::span<const float> embedding(std::size_t chunk_idx) const;
    const std::string& embedder_id() const { return embedder_id_; }
    /// Row-major chunk vectors; must cover every chunk.
    void attach_embeddings(std::vector<float> flat, std::size_t dim, std::string embedder_id);

    /// Digest over the canonical chunk serialization (collection content).
    std::string content_digest() const;

    /// Writes meta.json, chunks.jsonl and embeddings.f32 under dir.
    void save(const std::filesystem::path& dir) const;
    /// Loads a persisted index; nullopt on missing files, schema version
    /// mismatch, or corruption — callers rebuild from source in that case.
    static std::optional<Index> load(const std::filesystem::path& dir);

private:
    std::string collection_;
    std::vector<Chunk> chunks_;
    CorpusStats stats_;
    std::unordered_map<std::string, std::uint32_t> term_ids_;
    std::vector<std::vector<Posting>> postings_;
    std::vector<std::vector<std::uint32_t>> streams_;
    std::vector<float> embeddings_;      // row-major, size() * embedding_dim_
    std::size_t embedding_dim_ = 0;
    std::string embedder_id_;
};

} // namespace bcas::retrieval
