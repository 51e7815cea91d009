#pragma once

#include "bcas/datasets.hpp"
#include "bcas/retrieval/chunker.hpp"
#include "bcas/retrieval/embedder.hpp"
#include "bcas/retrieval/index.hpp"

#include <span>

namespace bcas::retrieval {

/// Chunks every document, builds the lexical index and, when an embedder is
/// given, the dense vectors. Throws SchemaError on empty document text.
Index build_index(std::string collection, std::span<const Document> documents,
                  const ChunkingConfig& chunking = {}, Embedder* embedder = nullptr);

} // namespace bcas::retrieval
