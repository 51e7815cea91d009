#pragma once

#include <atomic>
#include <chrono>
#include <span>
#include <string>
#include <vector>

namespace bcas::retrieval {

/// Text-to-vector provider. Implementations must be deterministic for
/// identical input and safe for concurrent calls.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<float> embed(const std::string& text) = 0;
    virtual std::vector<std::vector<float>> embed_batch(std::span<const std::string> texts);
    virtual std::size_t dimension() const = 0;
    virtual std::string id() const = 0;
};

/// Deterministic hash-based embedder for offline tests: each token maps to a
/// fixed pseudo-random direction, summed and L2-normalized. Dimension 64.
class HashEmbedder : public Embedder {
public:
    static constexpr std::size_t kDim = 64;

    std::vector<float> embed(const std::string& text) override;
    std::size_t dimension() const override { return kDim; }
    std::string id() const override { return "hash64/v1"; }
};

struct HttpEmbedderConfig {
    std::string endpoint;
    std::string path = "/embed";
    std::chrono::seconds timeout{60};
};

/// Client for a simple embedding service: POST {"texts": [...]} returns
/// {"vectors": [[...], ...]}. Throws EmbeddingUnavailable on any failure.
class HttpEmbedder : public Embedder {
public:
    explicit HttpEmbedder(HttpEmbedderConfig config);

    std::vector<float> embed(const std::string& text) override;
    std::vector<std::vector<float>> embed_batch(std::span<const std::string> texts) override;
    std::size_t dimension() const override { return dim_.load(); }
    std::string id() const override { return "http:" + config_.endpoint; }

private:
    HttpEmbedderConfig config_;
    std::atomic<std::size_t> dim_{0};   // learned from the first response
};

/// Cosine similarity with the usual conventions: identical vectors give
/// exactly 1.0 and any zero vector gives 0.0.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

} // namespace bcas::retrieval
