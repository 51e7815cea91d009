#include "bcas/retrieval/ingest.hpp"

#include "bcas/errors.hpp"
#include "bcas/retrieval/dense.hpp"
#include "bcas/strings.hpp"

namespace bcas::retrieval {

Index build_index(std::string collection, std::span<const Document> documents,
                  const ChunkingConfig& chunking, Embedder* embedder) {
    std::vector<Chunk> chunks;
    for (const Document& doc : documents) {
        if (trim_view(doc.text).empty()) {
            throw SchemaError("ingest: document has empty text: " + doc.doc_id);
        }
        auto doc_chunks = chunk_document(doc.text, doc.doc_id, collection, chunking);
        chunks.insert(chunks.end(), std::make_move_iterator(doc_chunks.begin()),
                      std::make_move_iterator(doc_chunks.end()));
    }
    Index index = Index::build(std::move(collection), std::move(chunks));
    if (embedder != nullptr) {
        embed_corpus(index, *embedder);
    }
    return index;
}

} // namespace bcas::retrieval
