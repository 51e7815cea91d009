#include "bcas/retrieval/chunker.hpp"

#include "bcas/errors.hpp"

#include <cctype>
#include <cstdio>

namespace bcas::retrieval {

namespace {

struct TokenSpan {
    std::size_t begin;
    std::size_t end;
};

std::vector<TokenSpan> whitespace_tokens(std::string_view text) {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
        if (i >= text.size()) {
            break;
        }
        const std::size_t begin = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
        spans.push_back({begin, i});
    }
    return spans;
}

std::string chunk_id_for(const std::string& doc_id, std::size_t seq) {
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "#%04zu", seq);
    return doc_id + suffix;
}

} // namespace

void ChunkingConfig::validate() const {
    if (chunk_tokens < 1) {
        throw ConfigError("chunking: chunk_tokens must be >= 1");
    }
    if (overlap_tokens >= chunk_tokens) {
        throw ConfigError("chunking: overlap_tokens must be < chunk_tokens");
    }
}

std::vector<Chunk> chunk_document(const std::string& text, const std::string& doc_id,
                                  const std::string& collection, const ChunkingConfig& config) {
    config.validate();
    const auto tokens = whitespace_tokens(text);
    if (tokens.empty()) {
        throw Error("chunk_document: document has no tokens: " + doc_id);
    }

    const std::size_t step = config.chunk_tokens - config.overlap_tokens;
    std::vector<Chunk> chunks;
    for (std::size_t start = 0; start < tokens.size(); start += step) {
        const std::size_t end = std::min(start + config.chunk_tokens, tokens.size());
        // Text runs to the start of the next chunk's first new token (or the
        // document end), so separators are preserved for reconstruction.
        const std::size_t text_begin = start == 0 ? 0 : tokens[start].begin;
        const std::size_t text_end = end < tokens.size() ? tokens[end].begin : text.size();
        Chunk chunk;
        chunk.chunk_id = chunk_id_for(doc_id, chunks.size());
        chunk.doc_id = doc_id;
        chunk.collection = collection;
        chunk.text = text.substr(text_begin, text_end - text_begin);
        chunk.token_count = static_cast<std::uint32_t>(end - start);
        chunks.push_back(std::move(chunk));
        if (end == tokens.size()) {
            break;
        }
    }
    return chunks;
}

std::string reconstruct_document(std::span<const Chunk> chunks, const ChunkingConfig& config) {
    config.validate();
    std::string out;
    bool first = true;
    for (const Chunk& chunk : chunks) {
        if (first) {
            out += chunk.text;
            first = false;
            continue;
        }
        const auto tokens = whitespace_tokens(chunk.text);
        if (tokens.size() <= config.overlap_tokens) {
            continue;
        }
        out += chunk.text.substr(tokens[config.overlap_tokens].begin);
    }
    return out;
}

} // namespace bcas::retrieval
