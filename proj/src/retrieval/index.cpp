#include "bcas/retrieval/index.hpp"

#include "bcas/errors.hpp"
#include "bcas/hash.hpp"
#include "bcas/retrieval/analyzer.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace bcas::retrieval {

using nlohmann::json;

Index Index::build(std::string collection, std::vector<Chunk> chunks) {
    Index index;
    index.collection_ = std::move(collection);
    index.chunks_ = std::move(chunks);
    index.streams_.resize(index.chunks_.size());

    // Token strings per chunk; string work dominates, so run it in parallel.
    std::vector<std::vector<std::string>> tokens(index.chunks_.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(index.chunks_.size()); ++i) {
        if (index.chunks_[i].text.empty()) {
            continue;   // rejected below, outside the parallel region
        }
        tokens[i] = analyze(index.chunks_[i].text);
    }

    // Dictionary ids in first-occurrence order, postings in chunk order.
    for (std::size_t i = 0; i < index.chunks_.size(); ++i) {
        const Chunk& chunk = index.chunks_[i];
        if (chunk.text.empty()) {
            throw SchemaError("index build: empty chunk text: " + chunk.chunk_id);
        }
        auto& stream = index.streams_[i];
        stream.reserve(tokens[i].size());
        for (std::uint32_t pos = 0; pos < tokens[i].size(); ++pos) {
            const std::string& token = tokens[i][pos];
            auto [it, inserted] = index.term_ids_.try_emplace(
                token, static_cast<std::uint32_t>(index.postings_.size()));
            if (inserted) {
                index.postings_.emplace_back();
            }
            const std::uint32_t id = it->second;
            auto& list = index.postings_[id];
            if (list.empty() || list.back().chunk != i) {
                list.push_back(Posting{static_cast<std::uint32_t>(i), {}});
            }
            list.back().positions.push_back(pos);
            stream.push_back(id);
        }
        index.stats_.total_tokens += stream.size();
    }
    index.stats_.chunk_count = index.chunks_.size();
    index.stats_.avg_chunk_length =
        index.stats_.chunk_count == 0
            ? 0.0
            : static_cast<double>(index.stats_.total_tokens) /
                  static_cast<double>(index.stats_.chunk_count);
    return index;
}

std::optional<std::uint32_t> Index::term_id(std::string_view term) const {
    auto it = term_ids_.find(std::string(term));
    if (it == term_ids_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::uint64_t Index::doc_frequency(std::string_view term) const {
    const auto id = term_id(term);
    return id.has_value() ? postings_[*id].size() : 0;
}

const std::vector<Posting>& Index::postings(std::uint32_t term_id) const {
    return postings_[term_id];
}

std::span<const std::uint32_t> Index::stream(std::size_t chunk_idx) const {
    return streams_[chunk_idx];
}

std::span<const float> Index::embedding(std::size_t chunk_idx) const {
    return {embeddings_.data() + chunk_idx * embedding_dim_, embedding_dim_};
}

void Index::attach_embeddings(std::vector<float> flat, std::size_t dim, std::string embedder_id) {
    if (dim == 0 || flat.size() != chunks_.size() * dim) {
        throw Error("attach_embeddings: vector count does not match chunk count");
    }
    embeddings_ = std::move(flat);
    embedding_dim_ = dim;
    embedder_id_ = std::move(embedder_id);
}

namespace {

json chunk_to_json(const Chunk& chunk) {
    return json{{"chunk_id", chunk.chunk_id},
                {"doc_id", chunk.doc_id},
                {"collection", chunk.collection},
                {"text", chunk.text},
                {"token_count", chunk.token_count}};
}

Chunk chunk_from_json(const json& j) {
    Chunk chunk;
    chunk.chunk_id = j.at("chunk_id").get<std::string>();
    chunk.doc_id = j.at("doc_id").get<std::string>();
    chunk.collection = j.at("collection").get<std::string>();
    chunk.text = j.at("text").get<std::string>();
    chunk.token_count = j.at("token_count").get<std::uint32_t>();
    return chunk;
}

} // namespace

std::string Index::content_digest() const {
    std::string canonical;
    for (const Chunk& chunk : chunks_) {
        canonical += chunk_to_json(chunk).dump();
        canonical += '\n';
    }
    return sha256_hex(canonical);
}

void Index::save(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);

    {
        std::ofstream out(dir / "chunks.jsonl");
        if (!out) {
            throw IoError("cannot write " + (dir / "chunks.jsonl").string());
        }
        for (const Chunk& chunk : chunks_) {
            out << chunk_to_json(chunk).dump() << '\n';
        }
    }
    if (has_embeddings()) {
        std::ofstream out(dir / "embeddings.f32", std::ios::binary);
        if (!out) {
            throw IoError("cannot write " + (dir / "embeddings.f32").string());
        }
        out.write(reinterpret_cast<const char*>(embeddings_.data()),
                  static_cast<std::streamsize>(embeddings_.size() * sizeof(float)));
    }
    json meta = {
        {"schema_version", kIndexSchemaVersion},
        {"collection", collection_},
        {"chunk_count", chunks_.size()},
        {"total_tokens", stats_.total_tokens},
        {"embedding_dim", embedding_dim_},
        {"embedder_id", embedder_id_},
        {"digest", content_digest()},
    };
    std::ofstream out(dir / "meta.json");
    if (!out) {
        throw IoError("cannot write " + (dir / "meta.json").string());
    }
    out << meta.dump(2) << '\n';
}

std::optional<Index> Index::load(const std::filesystem::path& dir) {
    std::ifstream meta_in(dir / "meta.json");
    if (!meta_in) {
        return std::nullopt;
    }
    json meta;
    try {
        meta_in >> meta;
    } catch (const json::exception&) {
        return std::nullopt;
    }
    if (meta.value("schema_version", -1) != kIndexSchemaVersion) {
        return std::nullopt;
    }

    std::ifstream chunks_in(dir / "chunks.jsonl");
    if (!chunks_in) {
        return std::nullopt;
    }
    std::vector<Chunk> chunks;
    std::string line;
    try {
        while (std::getline(chunks_in, line)) {
            if (line.empty()) {
                continue;
            }
            chunks.push_back(chunk_from_json(json::parse(line)));
        }
    } catch (const json::exception&) {
        return std::nullopt;
    }
    if (chunks.size() != meta.value("chunk_count", std::size_t{0})) {
        return std::nullopt;
    }

    Index index;
    try {
        index = Index::build(meta.value("collection", ""), std::move(chunks));
    } catch (const Error&) {
        return std::nullopt;
    }

    const auto dim = meta.value("embedding_dim", std::size_t{0});
    if (dim > 0) {
        std::ifstream emb_in(dir / "embeddings.f32", std::ios::binary);
        if (!emb_in) {
            return std::nullopt;
        }
        std::vector<float> flat(index.size() * dim);
        emb_in.read(reinterpret_cast<char*>(flat.data()),
                    static_cast<std::streamsize>(flat.size() * sizeof(float)));
        if (emb_in.gcount() != static_cast<std::streamsize>(flat.size() * sizeof(float))) {
            return std::nullopt;
        }
        index.attach_embeddings(std::move(flat), dim, meta.value("embedder_id", ""));
    }
    return index;
}

} // namespace bcas::retrieval
